#include "tubepose/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tubepose;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d rx(double a) {
    Eigen::Matrix3d m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}

Eigen::Matrix3d ry(double b) {
    Eigen::Matrix3d m;
    m << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
    return m;
}

// Plain triple loop so the check does not share Eigen's product code path.
Eigen::Matrix3d multiply(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
    Eigen::Matrix3d out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

RigidTransform random_transform(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    return {q.normalized().toRotationMatrix(), Point3(n(rng), n(rng), n(rng))};
}

}  // namespace

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
    CHECK(normalize_angle(0.0) == 0.0);
    CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
    CHECK(normalize_angle(0.25 + 4.0 * kPi) == doctest::Approx(0.25));
    const TiltAngles t(2.0 * kPi + 0.1, -2.0 * kPi - 0.2);
    CHECK(t.alpha() == doctest::Approx(0.1));
    CHECK(t.beta() == doctest::Approx(-0.2));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = normalize_angle(u(rng));
        CHECK(a > -kPi);
        CHECK(a <= kPi);
    }
}

TEST_CASE("rotation_from_tilt closed forms") {
    CHECK((rotation_from_tilt({0.0, 0.0}) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-15);

    Eigen::Matrix3d expected;
    expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
    CHECK((rotation_from_tilt({kPi / 2.0, 0.0}) - expected).cwiseAbs().maxCoeff() < 1e-15);

    const Eigen::Matrix3d oracle = multiply(ry(-0.2), rx(0.3));
    CHECK((rotation_from_tilt({0.3, -0.2}) - oracle).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("rotation_from_tilt is a proper rotation for random angles") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 10000; ++i) {
        const RotationMatrix r = rotation_from_tilt({u(rng), u(rng)});
        REQUIRE((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
        REQUIRE(std::abs(r.determinant() - 1.0) < 1e-9);
        REQUIRE(is_rotation(r));
    }
}

TEST_CASE("axis_direction") {
    CHECK((axis_direction({0.0, 0.0}) - Point3(0, 0, 1)).norm() < 1e-15);
    CHECK((axis_direction({kPi / 2.0, 0.0}) - Point3(0, -1, 0)).norm() < 1e-15);
    const Eigen::Matrix3d m = multiply(ry(-0.2), rx(0.3));
    CHECK((axis_direction({0.3, -0.2}) - m.col(2)).cwiseAbs().maxCoeff() <= 1e-12);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
        const TiltAngles t(u(rng), u(rng));
        const Point3 d = axis_direction(t);
        CHECK(std::abs(d.norm() - 1.0) <= 1e-12);
        CHECK((d - rotation_from_tilt(t).col(2)).norm() <= 1e-15);
    }
}

TEST_CASE("tilt_from_direction inverts axis_direction below a quarter turn") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 1000; ++i) {
        const TiltAngles t(u(rng), u(rng));
        const TiltAngles back = tilt_from_direction(axis_direction(t));
        CHECK(back.alpha() == doctest::Approx(t.alpha()).epsilon(1e-12));
        CHECK(back.beta() == doctest::Approx(t.beta()).epsilon(1e-12));
    }
}

TEST_CASE("point_axis_distance") {
    CHECK(point_axis_distance({0.0, 0.0}, {3, 4, 5}, {0, 0, 0}) == doctest::Approx(5.0).epsilon(1e-15));

    const TiltAngles t(0.3, -0.2);
    const Point3 o(0.1, 0.1, 0.0);
    const Point3 p(0.2, 0.0, 0.05);
    // Oracle: project onto the parametric line o + s d and measure the remainder.
    const Point3 d = multiply(ry(-0.2), rx(0.3)).col(2);
    const double s = (p - o).dot(d) / d.dot(d);
    const double oracle = (p - (o + s * d)).norm();
    CHECK(std::abs(point_axis_distance(t, p, o) - oracle) <= 1e-12);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    std::uniform_real_distribution<double> len(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const TiltAngles a(u(rng), u(rng));
        const Point3 origin(len(rng), len(rng), len(rng));
        const double along = len(rng);
        CHECK(point_axis_distance(a, origin + along * axis_direction(a), origin) <= 1e-12 * (1.0 + std::abs(along)));
    }
}

TEST_CASE("point_axis_distance is invariant under rigid transforms") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    std::normal_distribution<double> n(0.0, 0.1);
    for (int i = 0; i < 1000; ++i) {
        const TiltAngles a(u(rng), u(rng));
        const Point3 o(n(rng), n(rng), n(rng));
        const Point3 p(n(rng), n(rng), n(rng));
        const RigidTransform g = random_transform(rng);
        const TiltAngles moved = tilt_from_direction(g.rotation * axis_direction(a));
        const double before = point_axis_distance(a, p, o);
        const double after = point_axis_distance(moved, g.apply(p), g.apply(o));
        CHECK(std::abs(before - after) < 1e-9);
    }
}

TEST_CASE("rigid transform group laws") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const RigidTransform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
        const Point3 p(n(rng), n(rng), n(rng));
        CHECK(((a * b) * c).matrix().isApprox((a * (b * c)).matrix(), 1e-9));
        CHECK((a * a.inverse()).matrix().isApprox(Eigen::Matrix4d::Identity(), 1e-9));
        CHECK((a.inverse() * a).matrix().isIdentity(1e-9));
        CHECK(((a * b).apply(p) - a.apply(b.apply(p))).norm() < 1e-9);
        CHECK(((RigidTransform::identity() * a).matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-15);
        const RigidTransform m = RigidTransform::from_matrix(a.matrix());
        CHECK((m.matrix() - a.matrix()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("rotation helpers") {
    CHECK(rotation_angle_between(rotation_z(0.3), rotation_z(-0.2)) == doctest::Approx(0.5));
    CHECK(rotation_angle_between(rotation_z(0.0), rotation_z(kPi)) == doctest::Approx(kPi));
    Eigen::Matrix3d noisy = rotation_from_tilt({0.2, 0.1});
    noisy(0, 1) += 1e-6;
    CHECK_FALSE(is_rotation(noisy));
    CHECK(is_rotation(orthonormalize(noisy)));
    Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
    reflection(2, 2) = -1.0;
    CHECK_FALSE(is_rotation(reflection));

    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {2, 0, 0}, {0, 4, 6}};
    CHECK((centroid(cloud) - Point3(2.0 / 3.0, 4.0 / 3.0, 2.0)).norm() < 1e-15);
}
