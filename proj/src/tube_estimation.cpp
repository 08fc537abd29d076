#include "tubepose/tube_estimation.hpp"

#include "tubepose/error.hpp"
#include "tubepose/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tubepose {

std::string_view tube_status_name(TubeStatus status) noexcept {
    switch (status) {
        case TubeStatus::Ok: return "OK";
        case TubeStatus::RejectedInfeasible: return "REJECTED_INFEASIBLE";
        case TubeStatus::RejectedDegenerate: return "REJECTED_DEGENERATE";
    }
    return "UNKNOWN";
}

double tilt_objective(const kernels::SoaPoints& centered, const TiltAngles& angles, double r,
                      kernels::ResidualMode mode) {
    if (centered.size() == 0) return 0.0;
    return kernels::radial_residual_sum(centered, axis_direction(angles), r, mode) /
           static_cast<double>(centered.size());
}

TiltFit fit_tube_tilt(const PointCloud& cloud, const Point3& origin, double r, const FitOptions& options) {
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidParameter, "tube radius must be positive");
    if (cloud.size() < std::max<std::size_t>(options.min_points, 1)) {
        throw Error(ErrorCode::DegenerateInput, "tube cloud has " + std::to_string(cloud.size()) +
                                                    " points, need " + std::to_string(options.min_points));
    }
    if (!(options.grid_step > 0.0) || !(options.grid_half_range >= 0.0) || !(options.tolerance > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "invalid tilt fit options");
    }

    const kernels::SoaPoints centered(cloud, origin);
    int evaluations = 0;
    auto objective = [&](double alpha, double beta) {
        ++evaluations;
        return tilt_objective(centered, TiltAngles(alpha, beta), r, options.mode);
    };

    const int half_cells = static_cast<int>(std::floor(options.grid_half_range / options.grid_step + 1e-9));
    Eigen::Vector2d best(0.0, 0.0);
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = -half_cells; i <= half_cells; ++i) {
        for (int j = -half_cells; j <= half_cells; ++j) {
            const double a = i * options.grid_step, b = j * options.grid_step;
            const double v = objective(a, b);
            if (v < best_value) {
                best_value = v;
                best = {a, b};
            }
        }
    }

    // Restarted simplex: a simplex can stall on the kinks of the L1 surface,
    // so restart from the incumbent until a round brings no improvement.
    auto f = [&](const Eigen::Vector2d& x) { return objective(x.x(), x.y()); };
    double step = 0.5 * options.grid_step;
    for (int round = 0; round < 8 && evaluations < options.max_evaluations; ++round) {
        const SimplexResult res =
            nelder_mead_2d(f, best, step, options.tolerance, options.max_evaluations - evaluations);
        const bool improved = res.value < best_value;
        if (improved) {
            step = std::max(10.0 * options.tolerance, std::min(step, 4.0 * (res.x - best).norm()));
            best = res.x;
            best_value = res.value;
        }
        if (!improved) break;
    }

    return {TiltAngles(best.x(), best.y()), best_value, evaluations};
}

Polygon2 project_hull_to_rack_top(const PointCloud& cloud, const RigidTransform& rack_pose) {
    const RigidTransform to_rack = rack_pose.inverse();
    std::vector<Point2> flat;
    flat.reserve(cloud.size());
    for (const auto& p : cloud) {
        const Point3 q = to_rack.apply(p);
        flat.emplace_back(q.x(), q.y());
    }
    return convex_hull_2d(flat);
}

SlotAssignment assign_slot(const Polygon2& hull, const RackModel& model) {
    const double hull_area = area(hull);
    AxisRect bounds{hull.vertices.front(), hull.vertices.front()};
    for (const auto& v : hull.vertices) {
        bounds.min = bounds.min.cwiseMin(v);
        bounds.max = bounds.max.cwiseMax(v);
    }

    SlotAssignment best;
    for (std::size_t s = 0; s < model.slot_count(); ++s) {
        const AxisRect rect = model.slot_rect(s);
        if (rect.max.x() <= bounds.min.x() || rect.min.x() >= bounds.max.x() || rect.max.y() <= bounds.min.y() ||
            rect.min.y() >= bounds.max.y()) {
            continue;
        }
        const double overlap = area(polygon_clip(hull, rect));
        if (overlap > best.overlap_area) best = {s, overlap, 0.0};
    }
    if (!(best.overlap_area > 0.0)) throw Error(ErrorCode::NoOverlap, "tube hull overlaps no slot");
    best.overlap_fraction = hull_area > 0.0 ? std::min(1.0, best.overlap_area / hull_area) : 0.0;
    return best;
}

Point3 slot_origin(const RackModel& model, const RigidTransform& rack_pose, std::size_t slot_index) {
    if (slot_index >= model.slot_count()) {
        throw Error(ErrorCode::IndexOutOfRange, "slot index " + std::to_string(slot_index) + " out of range");
    }
    const Point2& c = model.slot_centers()[slot_index];
    return rack_pose.apply(Point3(c.x(), c.y(), model.top_height() - model.slot_depth()));
}

namespace {

bool fits(double angle, double r, double half_extent, double depth) {
    const double c = std::cos(angle);
    if (!(c > 0.0)) return false;
    return depth * std::tan(std::abs(angle)) + r / c <= half_extent;
}

}  // namespace

bool feasibility_check(const TiltAngles& angles, double r, const RackModel& model) {
    const double limit = std::min(model.half_length(), model.half_width());
    if (!(r > 0.0) || r >= limit) {
        throw Error(ErrorCode::InvalidParameter, "tube radius must be positive and below the slot half-size");
    }
    return fits(angles.alpha(), r, model.half_width(), model.slot_depth()) &&
           fits(angles.beta(), r, model.half_length(), model.slot_depth());
}

double feasibility_boundary_angle(double r, double half_extent, double depth) {
    if (!(r > 0.0) || r >= half_extent || !(depth > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "boundary angle needs 0 < r < half extent and depth > 0");
    }
    // The left side increases monotonically on [0, pi/2).
    double lo = 0.0, hi = 0.5 * std::numbers::pi;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (fits(mid, r, half_extent, depth) ? lo : hi) = mid;
    }
    return lo;
}

RigidTransform assemble_pose(const TiltAngles& angles, const Point3& origin) {
    return {rotation_from_tilt(angles), origin};
}

TiltAngles tilt_in_rack_frame(const TiltAngles& world, const RotationMatrix& rack_rotation) {
    return tilt_from_direction(rack_rotation.transpose() * axis_direction(world));
}

TiltAngles tilt_in_world_frame(const TiltAngles& rack, const RotationMatrix& rack_rotation) {
    return tilt_from_direction(rack_rotation * axis_direction(rack));
}

TiltAndOrigin decompose_pose(const RigidTransform& pose) {
    return {tilt_from_direction(pose.rotation.col(2)), pose.translation};
}

TubePoseEstimate estimate_tube(const TubeDetection& detection, const RigidTransform& rack_pose,
                               const RackModel& model, const EstimateOptions& options) {
    TubePoseEstimate est;
    est.id = detection.id;
    est.class_id = detection.spec.class_id;
    est.status = TubeStatus::RejectedDegenerate;

    const double r = detection.spec.radius;
    if (!(r > 0.0) || r >= std::min(model.half_length(), model.half_width())) {
        est.message = "tube radius does not fit the rack slots";
        return est;
    }
    if (detection.cloud.size() < std::max<std::size_t>(options.fit.min_points, 3)) {
        est.message = "too few points: " + std::to_string(detection.cloud.size());
        return est;
    }

    try {
        const Polygon2 hull = project_hull_to_rack_top(detection.cloud, rack_pose);
        est.slot = assign_slot(hull, model);
        est.origin = slot_origin(model, rack_pose, est.slot.slot_index);

        const TiltFit fit = fit_tube_tilt(detection.cloud, est.origin, r, options.fit);
        est.angles = fit.angles;
        est.pose = assemble_pose(est.angles, est.origin);
        const kernels::SoaPoints centered(detection.cloud, est.origin);
        est.residual = tilt_objective(centered, est.angles, r, kernels::ResidualMode::L1);
        est.feasible = feasibility_check(tilt_in_rack_frame(est.angles, rack_pose.rotation), r, model);
    } catch (const Error& e) {
        est.message = e.what();
        return est;
    }

    if (!est.feasible) {
        est.status = TubeStatus::RejectedInfeasible;
        est.message = "tilt violates slot containment";
    } else if (!(est.residual <= options.max_residual)) {
        est.status = TubeStatus::RejectedDegenerate;
        est.message = "residual " + std::to_string(est.residual) + " m exceeds limit";
    } else {
        est.status = TubeStatus::Ok;
    }
    return est;
}

std::vector<TubePoseEstimate> estimate_tubes(std::span<const TubeDetection> detections,
                                             const RackPoseEstimate& rack, const RackModel& model,
                                             const EstimateOptions& options) {
    if (!is_rotation(rack.pose.rotation, 1e-6) || !rack.pose.translation.allFinite()) {
        throw Error(ErrorCode::InvalidParameter, "rack pose is not a rigid transform");
    }
    std::vector<TubePoseEstimate> out;
    out.reserve(detections.size());
    for (const auto& d : detections) out.push_back(estimate_tube(d, rack.pose, model, options));
    return out;
}

}  // namespace tubepose
