#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/kdtree.hpp"
#include "tubepose/planar.hpp"
#include "tubepose/rack.hpp"

#include <array>
#include <span>
#include <vector>

namespace tubepose {

struct IcpParams {
    int max_iterations = 50;
    double convergence_epsilon = 1e-6;          ///< relative change of the objective
    double max_correspondence_distance = 0.005;  ///< meters
};

struct IcpResult {
    RigidTransform pose;  ///< maps source into the target frame
    /// RMS distance over the final correspondences within the gate.
    double rmse = 0.0;
    double inlier_fraction = 0.0;
    /// Truncated RMS: every source point contributes min(d, gate)^2. This is
    /// the quantity ICP decreases monotonically.
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Objective at the initial pose and after each accepted iteration.
    std::vector<double> objective_history;
};

/// Supplies the closest model point for ICP correspondences.
class ClosestPointModel {
public:
    virtual ~ClosestPointModel() = default;
    virtual Point3 closest_point(const Point3& query) const = 0;
};

/// Exact nearest neighbor in a point cloud (kd-tree). Holds a reference to the
/// cloud, which must outlive it.
class CloudModel final : public ClosestPointModel {
public:
    explicit CloudModel(const PointCloud& cloud);
    Point3 closest_point(const Point3& query) const override;
    const KdTree& tree() const noexcept { return tree_; }

private:
    const PointCloud& cloud_;
    KdTree tree_;
};

/// Closest point on the rack's analytic top surface (outer rectangle minus the
/// slot holes, at z = top_height), in the rack frame. This is the dense limit
/// of the template cloud.
class RackSurfaceModel final : public ClosestPointModel {
public:
    explicit RackSurfaceModel(const RackModel& model) : model_(model) {}
    Point3 closest_point(const Point3& query) const override;

private:
    const RackModel& model_;
};

/// Closed-form least-squares rigid transform mapping src onto dst
/// (cross-covariance SVD with reflection guard). Sizes must match and be >= 3.
RigidTransform best_fit_transform(std::span<const Point3> src, std::span<const Point3> dst);

/// Point-to-point ICP. Throws EmptyCloud, or NoCorrespondences when nothing
/// is within the gate at the initial pose.
IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const IcpParams& params = {});

/// Same against any closest-point model.
IcpResult icp(const PointCloud& source, const ClosestPointModel& target, const RigidTransform& init,
              const IcpParams& params = {});

struct PlaneFrame {
    Point3 origin;  ///< centroid
    Point3 normal;  ///< unit, oriented with non-negative world z
    Point3 axis_u;  ///< in-plane unit axes; (u, v, normal) is right-handed
    Point3 axis_v;
};

/// Least-squares plane through the cloud.
PlaneFrame fit_plane(const PointCloud& cloud);

/// Minimum-area rectangle of the cloud projected onto its dominant plane,
/// returned as a frame: x and y along the rectangle edges, z the plane normal,
/// origin at the rectangle center.
RigidTransform planar_obb(const PointCloud& cloud, OrientedRect* rect = nullptr);

/// Four initial rack poses aligning the template's OBB with the cloud's OBB,
/// one per quarter-turn about the plane normal.
std::array<RigidTransform, 4> obb_init_hypotheses(const PointCloud& rack_cloud, const RackModel& model);

struct RackPoseEstimate {
    RigidTransform pose;  ///< rack frame -> world
    double rmse = 0.0;
    double inlier_fraction = 0.0;
    double objective = 0.0;
    int hypothesis_index = 0;
    /// One refinement per hypothesis; their poses map the cloud into the rack frame.
    std::vector<IcpResult> candidates;
};

/// Refines every OBB hypothesis with ICP, registering the cloud onto the
/// analytic template surface, and keeps the refinement with the lowest
/// truncated objective; ties go to the lower hypothesis index.
RackPoseEstimate estimate_rack_pose(const PointCloud& rack_cloud, const RackModel& model,
                                    const IcpParams& params = {});

/// Gauss-Newton point-to-plane refinement of a rack pose against the analytic
/// surface. Residuals are distances to the closest surface point, linearized
/// along the direction to it (the top normal for points on the surface).
/// Steps that do not lower the truncated objective are halved, then rejected.
/// Returns the refined world -> rack pose in the candidates' convention.
IcpResult refine_rack_pose(const PointCloud& rack_cloud, const RackModel& model, const RigidTransform& rack_pose,
                           const IcpParams& params = {30, 1e-12, 0.005});

}  // namespace tubepose
