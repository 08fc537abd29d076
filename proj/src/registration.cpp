#include "tubepose/registration.hpp"

#include "tubepose/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tubepose {

namespace {

struct Correspondences {
    std::vector<Point3> src;
    std::vector<Point3> dst;
    double inlier_sq_sum = 0.0;
    double objective = 0.0;  // truncated RMS
};

Correspondences correspond(const PointCloud& source, const ClosestPointModel& target, const RigidTransform& pose,
                           double gate) {
    Correspondences c;
    c.src.reserve(source.size());
    c.dst.reserve(source.size());
    const double gate2 = gate * gate;
    double truncated = 0.0;
    for (const auto& p : source) {
        const Point3 moved = pose.apply(p);
        const Point3 q = target.closest_point(moved);
        const double d2 = (q - moved).squaredNorm();
        if (d2 <= gate2) {
            c.src.push_back(p);
            c.dst.push_back(q);
            c.inlier_sq_sum += d2;
            truncated += d2;
        } else {
            truncated += gate2;
        }
    }
    c.objective = std::sqrt(truncated / static_cast<double>(source.size()));
    return c;
}

}  // namespace

CloudModel::CloudModel(const PointCloud& cloud) : cloud_(cloud), tree_(cloud) {}

Point3 CloudModel::closest_point(const Point3& query) const { return cloud_[tree_.nearest(query).index]; }

Point3 RackSurfaceModel::closest_point(const Point3& query) const {
    const AxisRect top = model_.top_rect();
    Point2 p(std::clamp(query.x(), top.min.x(), top.max.x()), std::clamp(query.y(), top.min.y(), top.max.y()));
    if (model_.in_hole(p)) {
        const auto& dims = model_.dimensions();
        const double x0 = -0.5 * (dims.cols - 1) * dims.pitch_x;
        const double y0 = -0.5 * (dims.rows - 1) * dims.pitch_y;
        const Point2 c(x0 + std::round((p.x() - x0) / dims.pitch_x) * dims.pitch_x,
                       y0 + std::round((p.y() - y0) / dims.pitch_y) * dims.pitch_y);
        const Point2 d = p - c;
        // Leave the hole across its nearest edge.
        if (dims.half_length - std::abs(d.x()) <= dims.half_width - std::abs(d.y())) {
            p.x() = c.x() + std::copysign(dims.half_length, d.x());
        } else {
            p.y() = c.y() + std::copysign(dims.half_width, d.y());
        }
    }
    return {p.x(), p.y(), model_.top_height()};
}

RigidTransform best_fit_transform(std::span<const Point3> src, std::span<const Point3> dst) {
    if (src.size() != dst.size() || src.size() < 3) {
        throw Error(ErrorCode::DegenerateInput, "rigid fit needs at least 3 matched points");
    }
    Point3 cs = Point3::Zero(), cd = Point3::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        cs += src[i];
        cd += dst[i];
    }
    cs /= static_cast<double>(src.size());
    cd /= static_cast<double>(dst.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) cov += (src[i] - cs) * (dst[i] - cd).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d& u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
    if ((v * u.transpose()).determinant() < 0.0) s(2, 2) = -1.0;
    const RotationMatrix r = v * s * u.transpose();
    return {r, cd - r * cs};
}

IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const IcpParams& params) {
    if (target.empty()) throw Error(ErrorCode::EmptyCloud, "ICP target cloud is empty");
    const CloudModel model(target);
    return icp(source, model, init, params);
}

IcpResult icp(const PointCloud& source, const ClosestPointModel& target, const RigidTransform& init,
              const IcpParams& params) {
    if (source.empty()) throw Error(ErrorCode::EmptyCloud, "ICP source cloud is empty");
    if (params.max_iterations < 0 || !(params.convergence_epsilon >= 0.0) ||
        !(params.max_correspondence_distance > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "invalid ICP parameters");
    }
    const double gate = params.max_correspondence_distance;

    IcpResult result;
    result.pose = init;
    Correspondences current = correspond(source, target, init, gate);
    if (current.src.empty()) {
        throw Error(ErrorCode::NoCorrespondences, "no correspondences within the gate at the initial pose");
    }
    result.objective_history.push_back(current.objective);

    for (int it = 0; it < params.max_iterations; ++it) {
        if (current.src.size() < 3 || current.objective == 0.0) {
            result.converged = current.objective == 0.0;
            break;
        }
        const RigidTransform next_pose = best_fit_transform(current.src, current.dst);
        Correspondences next = correspond(source, target, next_pose, gate);
        // Alternating minimization cannot raise the truncated objective except
        // through rounding; keep the previous pose if it would.
        if (next.objective > current.objective || next.src.empty()) {
            result.converged = true;
            break;
        }
        const double change = current.objective - next.objective;
        result.pose = next_pose;
        current = std::move(next);
        result.objective_history.push_back(current.objective);
        result.iterations = it + 1;
        if (change <= params.convergence_epsilon * result.objective_history[result.objective_history.size() - 2]) {
            result.converged = true;
            break;
        }
    }

    result.pose.rotation = orthonormalize(result.pose.rotation);
    result.objective = current.objective;
    result.inlier_fraction = static_cast<double>(current.src.size()) / static_cast<double>(source.size());
    result.rmse = std::sqrt(current.inlier_sq_sum / static_cast<double>(current.src.size()));
    return result;
}

PlaneFrame fit_plane(const PointCloud& cloud) {
    if (cloud.size() < 3) throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points");
    const Point3 c = centroid(cloud);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : cloud) cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Point3 n = eig.eigenvectors().col(0).normalized();
    if (n.z() < 0.0) n = -n;

    Point3 u = Point3::UnitX() - Point3::UnitX().dot(n) * n;
    if (u.norm() < 1e-6) u = Point3::UnitY() - Point3::UnitY().dot(n) * n;
    u.normalize();
    return {c, n, u, n.cross(u)};
}

RigidTransform planar_obb(const PointCloud& cloud, OrientedRect* rect_out) {
    const PlaneFrame plane = fit_plane(cloud);
    std::vector<Point2> projected;
    projected.reserve(cloud.size());
    for (const auto& p : cloud) {
        const Point3 d = p - plane.origin;
        projected.emplace_back(d.dot(plane.axis_u), d.dot(plane.axis_v));
    }
    const OrientedRect rect = min_area_rect_2d(projected);
    if (rect_out) *rect_out = rect;

    const Point3 x = std::cos(rect.yaw) * plane.axis_u + std::sin(rect.yaw) * plane.axis_v;
    RigidTransform frame;
    frame.rotation.col(0) = x;
    frame.rotation.col(1) = plane.normal.cross(x);
    frame.rotation.col(2) = plane.normal;
    frame.translation = plane.origin + rect.center.x() * plane.axis_u + rect.center.y() * plane.axis_v;
    return frame;
}

std::array<RigidTransform, 4> obb_init_hypotheses(const PointCloud& rack_cloud, const RackModel& model) {
    const RigidTransform world_obb = planar_obb(rack_cloud);
    const RigidTransform template_obb_inv = planar_obb(model.template_cloud()).inverse();
    std::array<RigidTransform, 4> out;
    for (int k = 0; k < 4; ++k) {
        const RigidTransform turn{rotation_z(k * 0.5 * std::numbers::pi), Point3::Zero()};
        out[static_cast<std::size_t>(k)] = world_obb * turn * template_obb_inv;
    }
    return out;
}

RackPoseEstimate estimate_rack_pose(const PointCloud& rack_cloud, const RackModel& model, const IcpParams& params) {
    if (rack_cloud.empty()) throw Error(ErrorCode::EmptyCloud, "rack cloud is empty");
    const auto hypotheses = obb_init_hypotheses(rack_cloud, model);
    const RackSurfaceModel surface(model);

    RackPoseEstimate best;
    best.candidates.reserve(hypotheses.size());
    bool any = false;
    for (std::size_t k = 0; k < hypotheses.size(); ++k) {
        // Registers the cloud onto the template, so the refined pose is world -> rack.
        IcpResult refined;
        try {
            refined = icp(rack_cloud, surface, hypotheses[k].inverse(), params);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoCorrespondences) throw;
            refined.pose = hypotheses[k].inverse();
            refined.objective = params.max_correspondence_distance;
            refined.rmse = params.max_correspondence_distance;
            best.candidates.push_back(std::move(refined));
            continue;
        }
        if (!any || refined.objective < best.objective) {
            best.pose = refined.pose.inverse();
            best.rmse = refined.rmse;
            best.inlier_fraction = refined.inlier_fraction;
            best.objective = refined.objective;
            best.hypothesis_index = static_cast<int>(k);
            any = true;
        }
        best.candidates.push_back(std::move(refined));
    }
    if (!any) throw Error(ErrorCode::NoCorrespondences, "no rack hypothesis had correspondences");
    return best;
}

IcpResult refine_rack_pose(const PointCloud& rack_cloud, const RackModel& model, const RigidTransform& rack_pose,
                           const IcpParams& params) {
    if (rack_cloud.empty()) throw Error(ErrorCode::EmptyCloud, "rack cloud is empty");
    if (params.max_iterations < 0 || !(params.convergence_epsilon >= 0.0) ||
        !(params.max_correspondence_distance > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "invalid ICP parameters");
    }
    const RackSurfaceModel surface(model);
    const double gate = params.max_correspondence_distance;
    const double gate2 = gate * gate;

    struct State {
        double truncated = 0.0;
        double inlier_sq_sum = 0.0;
        std::size_t inliers = 0;
    };
    auto evaluate = [&](const RigidTransform& pose, Eigen::Matrix<double, 6, 6>* jtj, Eigen::Matrix<double, 6, 1>* jtr) {
        State st;
        if (jtj) {
            jtj->setZero();
            jtr->setZero();
        }
        for (const auto& p : rack_cloud) {
            const Point3 moved = pose.apply(p);
            const Point3 q = surface.closest_point(moved);
            const Point3 diff = moved - q;
            const double d2 = diff.squaredNorm();
            if (d2 > gate2) {
                st.truncated += gate2;
                continue;
            }
            st.truncated += d2;
            st.inlier_sq_sum += d2;
            ++st.inliers;
            if (!jtj) continue;
            const double d = std::sqrt(d2);
            const Point3 n = d > 1e-12 ? Point3(diff / d) : Point3::UnitZ();
            Eigen::Matrix<double, 6, 1> row;
            row.head<3>() = moved.cross(n);
            row.tail<3>() = n;
            jtj->noalias() += row * row.transpose();
            *jtr += row * d;
        }
        st.truncated = std::sqrt(st.truncated / static_cast<double>(rack_cloud.size()));
        return st;
    };

    IcpResult result;
    result.pose = rack_pose.inverse();
    Eigen::Matrix<double, 6, 6> jtj;
    Eigen::Matrix<double, 6, 1> jtr;
    State current = evaluate(result.pose, &jtj, &jtr);
    if (current.inliers == 0) throw Error(ErrorCode::NoCorrespondences, "no rack points within the gate");
    result.objective_history.push_back(current.truncated);

    for (int it = 0; it < params.max_iterations && current.truncated > 0.0; ++it) {
        // Minimum-norm step: directions the surface does not constrain stay put.
        const Eigen::Matrix<double, 6, 1> step = -jtj.completeOrthogonalDecomposition().solve(jtr);
        bool accepted = false;
        for (double scale = 1.0; scale >= 0.125 && !accepted; scale *= 0.5) {
            const Eigen::Matrix<double, 6, 1> x = scale * step;
            const double angle = x.head<3>().norm();
            const RotationMatrix dr =
                angle > 0.0 ? RotationMatrix(Eigen::AngleAxisd(angle, x.head<3>() / angle)) : RotationMatrix::Identity();
            const RigidTransform delta{dr, x.tail<3>()};
            const RigidTransform candidate = delta * result.pose;
            Eigen::Matrix<double, 6, 6> next_jtj;
            Eigen::Matrix<double, 6, 1> next_jtr;
            const State next = evaluate(candidate, &next_jtj, &next_jtr);
            if (next.truncated < current.truncated && next.inliers > 0) {
                const double change = current.truncated - next.truncated;
                result.pose = candidate;
                jtj = next_jtj;
                jtr = next_jtr;
                current = next;
                result.objective_history.push_back(current.truncated);
                result.iterations = it + 1;
                accepted = true;
                if (change <= params.convergence_epsilon * result.objective_history[result.objective_history.size() - 2]) {
                    result.converged = true;
                }
            }
        }
        if (!accepted || result.converged) {
            result.converged = true;
            break;
        }
    }

    result.pose.rotation = orthonormalize(result.pose.rotation);
    result.objective = current.truncated;
    result.inlier_fraction = static_cast<double>(current.inliers) / static_cast<double>(rack_cloud.size());
    result.rmse = std::sqrt(current.inlier_sq_sum / static_cast<double>(current.inliers));
    return result;
}

}  // namespace tubepose
