#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <vector>

namespace tubepose {

using Point3 = Eigen::Vector3d;
using Point2 = Eigen::Vector2d;
using RotationMatrix = Eigen::Matrix3d;

/// Points in meters. Order is meaningful: detection files index into it.
struct PointCloud {
    std::vector<Point3> points;

    PointCloud() = default;
    explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    const Point3& operator[](std::size_t i) const { return points[i]; }
    Point3& operator[](std::size_t i) { return points[i]; }
    auto begin() const noexcept { return points.begin(); }
    auto end() const noexcept { return points.end(); }
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians) noexcept;

/// Tilt of a tube axis: alpha about x, beta about y. Both wrapped into (-pi, pi].
class TiltAngles {
public:
    TiltAngles() = default;
    TiltAngles(double alpha, double beta)
        : alpha_(normalize_angle(alpha)), beta_(normalize_angle(beta)) {}

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

private:
    double alpha_ = 0.0;
    double beta_ = 0.0;
};

/// Ry(beta) * Rx(alpha).
RotationMatrix rotation_from_tilt(const TiltAngles& angles) noexcept;

/// Third column of rotation_from_tilt: (sin b cos a, -sin a, cos b cos a).
Point3 axis_direction(const TiltAngles& angles) noexcept;

/// Recovers (alpha, beta) from a unit axis direction. Inverse of axis_direction
/// for directions with a positive z component.
TiltAngles tilt_from_direction(const Point3& direction) noexcept;

/// Distance from p to the infinite line through o along axis_direction(angles).
double point_axis_distance(const TiltAngles& angles, const Point3& p, const Point3& o) noexcept;

struct RigidTransform {
    RotationMatrix rotation = RotationMatrix::Identity();
    Point3 translation = Point3::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_matrix(const Eigen::Matrix4d& m);

    Point3 apply(const Point3& p) const { return rotation * p + translation; }
    PointCloud apply(const PointCloud& cloud) const;
    RigidTransform inverse() const;
    Eigen::Matrix4d matrix() const;

    /// (a * b).apply(p) == a.apply(b.apply(p))
    friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
        return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
    }
};

/// Rotation about the z axis.
RotationMatrix rotation_z(double radians) noexcept;

/// Angle in radians between two rotations (geodesic distance on SO(3)).
double rotation_angle_between(const RotationMatrix& a, const RotationMatrix& b) noexcept;

/// True when R^T R = I and det R = +1, both within tol.
bool is_rotation(const RotationMatrix& r, double tol = 1e-9) noexcept;

/// Nearest rotation in the Frobenius sense (SVD projection onto SO(3)).
RotationMatrix orthonormalize(const RotationMatrix& m);

Point3 centroid(const PointCloud& cloud);

}  // namespace tubepose
