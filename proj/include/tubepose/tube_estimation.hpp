#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/kernels.hpp"
#include "tubepose/planar.hpp"
#include "tubepose/rack.hpp"
#include "tubepose/registration.hpp"

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace tubepose {

struct TubeSpec {
    std::string class_id;
    double radius = 0.006;  // r
    double length = 0.075;
    bool capped = false;  ///< opaque cap visible as a top disc
};

struct TubeDetection {
    std::string id;
    TubeSpec spec;
    PointCloud cloud;  ///< world frame, cropped to this tube
};

struct SlotAssignment {
    std::size_t slot_index = 0;
    double overlap_area = 0.0;      ///< m^2
    double overlap_fraction = 0.0;  ///< of the hull area
};

enum class TubeStatus { Ok, RejectedInfeasible, RejectedDegenerate };

std::string_view tube_status_name(TubeStatus status) noexcept;

struct TubePoseEstimate {
    std::string id;
    std::string class_id;
    SlotAssignment slot;
    TiltAngles angles;
    Point3 origin = Point3::Zero();  ///< slot bottom center, world
    RigidTransform pose;             ///< rotation_from_tilt(angles), origin
    double residual = 0.0;           ///< mean |D - r|, meters
    bool feasible = false;
    TubeStatus status = TubeStatus::RejectedDegenerate;
    std::string message;  ///< reason for a rejection, empty when OK
};

struct FitOptions {
    kernels::ResidualMode mode = kernels::ResidualMode::L1;
    double grid_half_range = 20.0 * std::numbers::pi / 180.0;
    double grid_step = 2.0 * std::numbers::pi / 180.0;
    double tolerance = 1e-9;  ///< simplex diameter, radians
    int max_evaluations = 4000;
    std::size_t min_points = 30;
};

struct EstimateOptions {
    FitOptions fit;
    double max_residual = 0.002;  ///< meters; larger fits are REJECTED_DEGENERATE
};

/// Mean radial residual of the cloud about the axis through o with the given
/// tilt: mean |D - r| for L1, mean (D - r)^2 for L2.
double tilt_objective(const kernels::SoaPoints& centered, const TiltAngles& angles, double r,
                      kernels::ResidualMode mode);

struct TiltFit {
    TiltAngles angles;
    double residual = 0.0;  ///< objective value at the optimum
    int evaluations = 0;
};

/// Coarse grid over [-range, range]^2 followed by simplex refinement from the
/// best cell. Throws DegenerateInput below options.min_points or
/// InvalidParameter for r <= 0.
TiltFit fit_tube_tilt(const PointCloud& cloud, const Point3& origin, double r, const FitOptions& options = {});

/// Rack-frame 2D convex hull of the detection cloud projected onto the rack top.
Polygon2 project_hull_to_rack_top(const PointCloud& cloud, const RigidTransform& rack_pose);

/// Slot whose hole holds the largest part of the hull. Throws NoOverlap.
SlotAssignment assign_slot(const Polygon2& hull, const RackModel& model);

/// World position of the slot's bottom center. Throws IndexOutOfRange.
Point3 slot_origin(const RackModel& model, const RigidTransform& rack_pose, std::size_t slot_index);

/// Whether a tube of radius r pivoting at the slot bottom center stays inside
/// the hole at the top plane: H tan|a| + r / cos a <= W and likewise for beta
/// against L. Throws InvalidParameter if r >= min(L, W).
bool feasibility_check(const TiltAngles& angles, double r, const RackModel& model);

/// Largest tilt in [0, pi/2) satisfying H tan(a) + r / cos(a) <= half_extent.
double feasibility_boundary_angle(double r, double half_extent, double depth);

RigidTransform assemble_pose(const TiltAngles& angles, const Point3& origin);

/// Tilt of the same axis measured in the rack frame. Feasibility is a property
/// of the slot, so it is checked on these angles.
TiltAngles tilt_in_rack_frame(const TiltAngles& world, const RotationMatrix& rack_rotation);

/// Inverse of tilt_in_rack_frame.
TiltAngles tilt_in_world_frame(const TiltAngles& rack, const RotationMatrix& rack_rotation);

struct TiltAndOrigin {
    TiltAngles angles;
    Point3 origin;
};

/// Inverse of assemble_pose for |alpha|, |beta| < pi/2.
TiltAndOrigin decompose_pose(const RigidTransform& pose);

/// Runs hull projection, slot assignment, origin lookup, tilt fit and the
/// feasibility (in the rack frame) and residual gates for each detection. Output order matches the
/// input. Per-tube failures are reported in the status; an invalid rack pose
/// throws InvalidParameter.
std::vector<TubePoseEstimate> estimate_tubes(std::span<const TubeDetection> detections,
                                             const RackPoseEstimate& rack, const RackModel& model,
                                             const EstimateOptions& options = {});

/// Single-tube step of estimate_tubes.
TubePoseEstimate estimate_tube(const TubeDetection& detection, const RigidTransform& rack_pose,
                               const RackModel& model, const EstimateOptions& options = {});

}  // namespace tubepose
