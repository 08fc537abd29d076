#include "tubepose/geometry.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace tubepose {

double normalize_angle(double radians) noexcept {
    double a = std::remainder(radians, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

RotationMatrix rotation_from_tilt(const TiltAngles& angles) noexcept {
    const double sa = std::sin(angles.alpha()), ca = std::cos(angles.alpha());
    const double sb = std::sin(angles.beta()), cb = std::cos(angles.beta());
    RotationMatrix r;
    r << cb, sb * sa, sb * ca,
         0.0, ca, -sa,
         -sb, cb * sa, cb * ca;
    return r;
}

Point3 axis_direction(const TiltAngles& angles) noexcept {
    const double sa = std::sin(angles.alpha()), ca = std::cos(angles.alpha());
    const double sb = std::sin(angles.beta()), cb = std::cos(angles.beta());
    return {sb * ca, -sa, cb * ca};
}

TiltAngles tilt_from_direction(const Point3& direction) noexcept {
    const Point3 d = direction.normalized();
    const double alpha = std::atan2(-d.y(), std::hypot(d.x(), d.z()));
    const double beta = std::atan2(d.x(), d.z());
    return {alpha, beta};
}

double point_axis_distance(const TiltAngles& angles, const Point3& p, const Point3& o) noexcept {
    return (o - p).cross(axis_direction(angles)).norm();
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

PointCloud RigidTransform::apply(const PointCloud& cloud) const {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud) out.points.push_back(apply(p));
    return out;
}

RigidTransform RigidTransform::inverse() const {
    const RotationMatrix rt = rotation.transpose();
    return {rt, -(rt * translation)};
}

Eigen::Matrix4d RigidTransform::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

RotationMatrix rotation_z(double radians) noexcept {
    const double c = std::cos(radians), s = std::sin(radians);
    RotationMatrix r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

double rotation_angle_between(const RotationMatrix& a, const RotationMatrix& b) noexcept {
    // atan2 form stays accurate near zero where acos((tr - 1) / 2) loses digits.
    const RotationMatrix d = a.transpose() * b;
    const Eigen::Vector3d v(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
    return std::atan2(0.5 * v.norm(), 0.5 * (d.trace() - 1.0));
}

bool is_rotation(const RotationMatrix& r, double tol) noexcept {
    const double ortho = (r.transpose() * r - RotationMatrix::Identity()).cwiseAbs().maxCoeff();
    return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

RotationMatrix orthonormalize(const RotationMatrix& m) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
    return u * v.transpose();
}

Point3 centroid(const PointCloud& cloud) {
    Point3 sum = Point3::Zero();
    for (const auto& p : cloud) sum += p;
    return cloud.empty() ? sum : Point3(sum / static_cast<double>(cloud.size()));
}

}  // namespace tubepose
