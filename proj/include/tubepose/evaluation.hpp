#pragma once

#include "tubepose/geometry.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tubepose {

/// Tube pose reduced to what evaluation needs.
struct PoseRecord {
    std::string id;
    std::string class_id;
    std::size_t slot = 0;
    RigidTransform pose;
};

struct TubeError {
    std::string id;
    std::string class_id;
    double rx_deg = 0.0;
    double ry_deg = 0.0;
    double tx_mm = 0.0;
    double ty_mm = 0.0;
    double tz_mm = 0.0;
};

struct ClassMean {
    std::string class_id;
    std::size_t count = 0;
    double rx_deg = 0.0;
    double ry_deg = 0.0;
    double tx_mm = 0.0;
    double ty_mm = 0.0;
    double tz_mm = 0.0;
};

struct ErrorReport {
    std::size_t trials = 0;
    std::vector<TubeError> tubes;
    std::vector<ClassMean> classes;  ///< sorted by class_id
};

enum class MatchBy { Id, Slot };

/// Rx and Ry compare the tilt angles of the tube axis (z is the symmetry axis
/// and excluded); translation errors are per-axis absolute differences. Every
/// estimate must match exactly one ground-truth entry, else IdentityMismatch.
ErrorReport evaluate_errors(std::span<const PoseRecord> estimates, std::span<const PoseRecord> ground_truth,
                            MatchBy match = MatchBy::Id);

struct Trial {
    std::vector<PoseRecord> estimates;
    std::vector<PoseRecord> ground_truth;
};

/// Pools the per-tube errors of all trials; class means are over every tube
/// of that class in every trial.
ErrorReport evaluate_trials(std::span<const Trial> trials, MatchBy match = MatchBy::Id);

/// Table with one row per class: Rx, Ry in degrees and Tx, Ty, Tz in mm.
std::string format_error_table(const ErrorReport& report);

}  // namespace tubepose
