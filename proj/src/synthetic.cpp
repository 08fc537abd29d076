#include "tubepose/synthetic.hpp"

#include "tubepose/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace tubepose::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t poisson_count(std::mt19937_64& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<std::size_t>(dist(rng));
}

void add_noise(PointCloud& cloud, double sigma, std::mt19937_64& rng) {
    if (!(sigma > 0.0)) return;
    std::normal_distribution<double> n(0.0, sigma);
    for (auto& p : cloud.points) {
        const double dx = n(rng), dy = n(rng), dz = n(rng);
        p += Point3(dx, dy, dz);
    }
}

void check_fraction(double f, const char* name) {
    if (!(f >= 0.0 && f < 1.0)) throw Error(ErrorCode::InvalidParameter, std::string(name) + " must lie in [0, 1)");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TubeClassPreset tube_class_preset(const std::string& name) {
    if (name == "tube1") return {{"tube1", 0.006, 0.075, false}, {0.6, 0.3}};
    if (name == "tube2") return {{"tube2", 0.006, 0.075, true}, {0.2, 0.0}};
    if (name == "tube3") return {{"tube3", 0.0065, 0.100, true}, {0.2, 0.0}};
    throw Error(ErrorCode::InvalidParameter, "unknown tube class: " + name);
}

PointCloud SyntheticScene::rack_cloud() const {
    PointCloud out;
    out.points.reserve(rack_indices.size());
    for (std::size_t i : rack_indices) out.points.push_back(cloud[i]);
    return out;
}

PointCloud SyntheticScene::tube_cloud(std::size_t tube) const {
    PointCloud out;
    out.points.reserve(tube_indices.at(tube).size());
    for (std::size_t i : tube_indices[tube]) out.points.push_back(cloud[i]);
    return out;
}

std::vector<TubeDetection> SyntheticScene::detections() const {
    std::vector<TubeDetection> out;
    out.reserve(tubes.size());
    for (std::size_t t = 0; t < tubes.size(); ++t) out.push_back({tubes[t].id, tube_specs[t], tube_cloud(t)});
    return out;
}

PointCloud sample_cylinder(const TubeSpec& spec, const RigidTransform& pose, double density, double noise_sigma,
                           std::uint64_t seed, double visible_from) {
    if (!(density > 0.0) || !(spec.radius > 0.0) || !(spec.length > 0.0) || !(noise_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "cylinder sampling needs positive density and dimensions");
    }
    const double s0 = std::clamp(visible_from, 0.0, spec.length);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PointCloud cloud;
    const std::size_t lateral = poisson_count(rng, density * kTwoPi * spec.radius * (spec.length - s0));
    const std::size_t cap = spec.capped ? poisson_count(rng, density * std::numbers::pi * spec.radius * spec.radius) : 0;
    cloud.points.reserve(lateral + cap);
    for (std::size_t i = 0; i < lateral; ++i) {
        const double theta = kTwoPi * unit(rng);
        const double s = s0 + (spec.length - s0) * unit(rng);
        cloud.points.push_back(pose.apply({spec.radius * std::cos(theta), spec.radius * std::sin(theta), s}));
    }
    for (std::size_t i = 0; i < cap; ++i) {
        const double rho = spec.radius * std::sqrt(unit(rng));
        const double theta = kTwoPi * unit(rng);
        cloud.points.push_back(pose.apply({rho * std::cos(theta), rho * std::sin(theta), spec.length}));
    }
    add_noise(cloud, noise_sigma, rng);
    return cloud;
}

PointCloud apply_transparency_dropout(const PointCloud& cloud, const RigidTransform& tube_pose, const Dropout& dropout,
                                      double length, std::uint64_t seed, double band_from) {
    check_fraction(dropout.sector_fraction, "sector_fraction");
    check_fraction(dropout.axial_fraction, "axial_fraction");
    if (dropout.sector_fraction == 0.0 && dropout.axial_fraction == 0.0) return cloud;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double sector_start = kTwoPi * unit(rng);
    const double sector_width = kTwoPi * dropout.sector_fraction;
    const double band = dropout.axial_fraction * length;
    const double band_lo = band_from + std::max(0.0, length - band_from - band) * unit(rng);
    const double band_hi = band_lo + band;

    const RigidTransform to_tube = tube_pose.inverse();
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud) {
        const Point3 q = to_tube.apply(p);
        double rel = std::atan2(q.y(), q.x()) - sector_start;
        rel -= kTwoPi * std::floor(rel / kTwoPi);
        if (rel < sector_width) continue;
        if (band > 0.0 && q.z() >= band_lo && q.z() < band_hi) continue;
        out.points.push_back(p);
    }
    return out;
}

PointCloud sample_rack_top(const RackModel& model, const RigidTransform& pose, double density, double noise_sigma,
                           std::uint64_t seed) {
    if (!(density > 0.0) || !(noise_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "rack sampling needs positive density");
    }
    std::mt19937_64 rng(seed);
    const AxisRect top = model.top_rect();
    std::uniform_real_distribution<double> ux(top.min.x(), top.max.x());
    std::uniform_real_distribution<double> uy(top.min.y(), top.max.y());
    const std::size_t n = poisson_count(rng, density * top.area());

    PointCloud cloud;
    cloud.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = ux(rng), y = uy(rng);
        if (model.in_hole({x, y})) continue;
        cloud.points.push_back(pose.apply({x, y, model.top_height()}));
    }
    add_noise(cloud, noise_sigma, rng);
    return cloud;
}

SyntheticScene generate_scene(const SceneConfig& config) {
    const RackModel model(config.rack);
    if (!(config.tube_density > 0.0) || !(config.rack_density > 0.0) || !(config.noise_sigma >= 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "scene densities must be positive and noise non-negative");
    }
    if (!is_rotation(config.rack_pose.rotation, 1e-9)) {
        throw Error(ErrorCode::InvalidParameter, "rack pose rotation is not orthonormal");
    }
    check_fraction(config.dropout.sector_fraction, "sector_fraction");
    check_fraction(config.dropout.axial_fraction, "axial_fraction");

    std::set<std::size_t> used;
    for (std::size_t t = 0; t < config.tubes.size(); ++t) {
        const TubeEntry& e = config.tubes[t];
        if (e.slot >= model.slot_count()) {
            throw Error(ErrorCode::InvalidParameter, "tube " + std::to_string(t) + " slot out of range");
        }
        if (!used.insert(e.slot).second) {
            throw Error(ErrorCode::InvalidParameter, "tube " + std::to_string(t) + " reuses slot " +
                                                         std::to_string(e.slot));
        }
        if (e.dropout) {
            check_fraction(e.dropout->sector_fraction, "sector_fraction");
            check_fraction(e.dropout->axial_fraction, "axial_fraction");
        }
        bool ok = false;
        try {
            ok = feasibility_check(e.tilt, e.spec.radius, model);
        } catch (const Error&) {
            ok = false;
        }
        if (!ok || !(e.spec.length > model.slot_depth())) {
            throw Error(ErrorCode::InfeasibleConfig, "tube " + std::to_string(t) + " (id '" + e.id +
                                                         "') does not fit its slot at the requested tilt");
        }
    }

    SyntheticScene scene;
    scene.rack_pose = config.rack_pose;

    const PointCloud rack = sample_rack_top(model, config.rack_pose, config.rack_density, config.noise_sigma,
                                            derive_seed(config.seed, 0));
    scene.cloud.points = rack.points;
    scene.rack_indices.resize(rack.size());
    std::iota(scene.rack_indices.begin(), scene.rack_indices.end(), std::size_t{0});

    const RigidTransform to_rack = config.rack_pose.inverse();
    for (std::size_t t = 0; t < config.tubes.size(); ++t) {
        const TubeEntry& e = config.tubes[t];
        const Point3 origin = slot_origin(model, config.rack_pose, e.slot);
        const TiltAngles world_tilt = tilt_in_world_frame(e.tilt, config.rack_pose.rotation);
        const RigidTransform pose = assemble_pose(world_tilt, origin);
        const std::uint64_t tube_seed = derive_seed(config.seed, 2 * t + 1);

        PointCloud cloud = sample_cylinder(e.spec, pose, config.tube_density, config.noise_sigma, tube_seed,
                                           model.slot_depth());
        // Hide what sits below the rack's top surface.
        PointCloud visible;
        visible.points.reserve(cloud.size());
        for (const auto& p : cloud) {
            if (to_rack.apply(p).z() >= model.top_height()) visible.points.push_back(p);
        }
        const Dropout dropout = e.dropout.value_or(config.dropout);
        cloud = apply_transparency_dropout(visible, pose, dropout, e.spec.length, derive_seed(config.seed, 2 * t + 2),
                                           model.slot_depth());

        std::vector<std::size_t> idx(cloud.size());
        std::iota(idx.begin(), idx.end(), scene.cloud.size());
        scene.cloud.points.insert(scene.cloud.points.end(), cloud.points.begin(), cloud.points.end());
        scene.tube_indices.push_back(std::move(idx));
        scene.tube_specs.push_back(e.spec);
        scene.tubes.push_back({e.id, e.spec.class_id, e.slot, world_tilt, e.tilt, pose});
    }
    return scene;
}

SceneConfig random_scene_config(const RandomSceneOptions& options, std::uint64_t seed) {
    const RackModel model(options.rack);
    if (options.tube_count > model.slot_count()) {
        throw Error(ErrorCode::InvalidParameter, "more tubes than slots");
    }
    const TubeClassPreset preset = tube_class_preset(options.tube_class);

    std::mt19937_64 rng(derive_seed(seed, 0xC0FFEE));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto symmetric = [&](double half) { return half * (2.0 * unit(rng) - 1.0); };

    SceneConfig cfg;
    cfg.rack = options.rack;
    cfg.noise_sigma = options.noise_sigma;
    cfg.dropout = options.dropout.value_or(preset.dropout);
    cfg.tube_density = options.tube_density;
    cfg.rack_density = options.rack_density;
    cfg.seed = seed;

    const double yaw = kTwoPi * unit(rng);
    const TiltAngles rack_tilt(symmetric(options.max_rack_tilt), symmetric(options.max_rack_tilt));
    cfg.rack_pose.rotation = rotation_from_tilt(rack_tilt) * rotation_z(yaw);
    cfg.rack_pose.translation = {symmetric(0.1), symmetric(0.1), 0.5 + symmetric(0.05)};

    std::vector<std::size_t> slots(model.slot_count());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(options.tube_count);

    for (std::size_t t = 0; t < options.tube_count; ++t) {
        TubeEntry e;
        e.id = "t" + std::to_string(t);
        e.slot = slots[t];
        e.spec = preset.spec;
        int attempts = 0;
        do {
            if (++attempts > 10000) throw Error(ErrorCode::InfeasibleConfig, "no feasible tilt within max_tilt");
            e.tilt = TiltAngles(symmetric(options.max_tilt), symmetric(options.max_tilt));
        } while (!feasibility_check(e.tilt, e.spec.radius, model));
        cfg.tubes.push_back(e);
    }
    return cfg;
}

}  // namespace tubepose::synth
