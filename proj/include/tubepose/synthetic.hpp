#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/rack.hpp"
#include "tubepose/tube_estimation.hpp"

#include <cstdint>
#include <optional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace tubepose::synth {

/// Structured point loss on semi-transparent tubes: one contiguous angular
/// sector around the axis and one contiguous axial band.
struct Dropout {
    double sector_fraction = 0.0;  ///< [0, 1)
    double axial_fraction = 0.0;   ///< [0, 1), of the tube length
};

struct TubeClassPreset {
    TubeSpec spec;
    Dropout dropout;
};

/// "tube1" (semi-transparent, heavy dropout), "tube2" and "tube3" (opaque
/// caps, light dropout). Throws InvalidParameter for unknown names.
TubeClassPreset tube_class_preset(const std::string& name);

struct TubeEntry {
    std::string id;
    std::size_t slot = 0;
    TubeSpec spec;
    TiltAngles tilt;  ///< relative to the rack frame
    std::optional<Dropout> dropout;  ///< falls back to SceneConfig::dropout
};

struct SceneConfig {
    RackDimensions rack;
    RigidTransform rack_pose;
    std::vector<TubeEntry> tubes;
    double noise_sigma = 0.0003;
    Dropout dropout;
    double tube_density = 2.0e6;  ///< points per m^2 of visible surface
    double rack_density = 2.0e6;
    std::uint64_t seed = 1;
};

struct TubeTruth {
    std::string id;
    std::string class_id;
    std::size_t slot = 0;
    TiltAngles tilt;       ///< world frame, the convention of estimates
    TiltAngles rack_tilt;  ///< as configured, relative to the rack
    RigidTransform pose;   ///< assemble_pose(tilt, slot origin)
};

struct SyntheticScene {
    PointCloud cloud;                                ///< rack points then tube points
    std::vector<std::size_t> rack_indices;           ///< into cloud
    std::vector<std::vector<std::size_t>> tube_indices;  ///< per tube, into cloud
    std::vector<TubeSpec> tube_specs;
    RigidTransform rack_pose;
    std::vector<TubeTruth> tubes;

    PointCloud rack_cloud() const;
    PointCloud tube_cloud(std::size_t tube) const;
    std::vector<TubeDetection> detections() const;
};

/// Random points on the lateral surface between axial heights visible_from and
/// spec.length (plus the top disc for capped tubes), in the tube frame mapped
/// through pose, with isotropic Gaussian noise. Point count is Poisson with
/// mean density * area.
PointCloud sample_cylinder(const TubeSpec& spec, const RigidTransform& pose, double density, double noise_sigma,
                           std::uint64_t seed, double visible_from = 0.0);

/// Removes one angular sector of width sector_fraction * 2 pi (random start),
/// then one axial band of height axial_fraction * length placed at random
/// within [band_from, length]. Angles and heights are measured in tube_pose's
/// frame (z = axis).
PointCloud apply_transparency_dropout(const PointCloud& cloud, const RigidTransform& tube_pose, const Dropout& dropout,
                                      double length, std::uint64_t seed, double band_from = 0.0);

/// Uniform points on the rack top rectangle outside the holes, at z = top_height
/// in the rack frame, mapped through pose, with Gaussian noise.
PointCloud sample_rack_top(const RackModel& model, const RigidTransform& pose, double density, double noise_sigma,
                           std::uint64_t seed);

/// Builds the scene. Throws InvalidParameter on malformed configs and
/// InfeasibleConfig when a ground-truth tilt fails feasibility_check.
SyntheticScene generate_scene(const SceneConfig& config);

/// Deterministic sub-seed derivation (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

struct RandomSceneOptions {
    RackDimensions rack;
    std::size_t tube_count = 3;
    std::string tube_class = "tube2";
    double max_tilt = 10.0 * std::numbers::pi / 180.0;  ///< per angle
    double noise_sigma = 0.0;
    std::optional<Dropout> dropout;  ///< defaults to the class preset
    double max_rack_tilt = 1.0 * std::numbers::pi / 180.0;
    double tube_density = 2.0e6;
    double rack_density = 2.0e6;
};

/// Random rack pose, distinct random slots and rack-relative tilts within
/// max_tilt that also pass feasibility_check.
SceneConfig random_scene_config(const RandomSceneOptions& options, std::uint64_t seed);

}  // namespace tubepose::synth
