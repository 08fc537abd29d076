#include "tubepose/error.hpp"
#include "tubepose/filters.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

using namespace tubepose;

namespace {

bool contains_exact(const PointCloud& cloud, const Point3& p) {
    return std::any_of(cloud.begin(), cloud.end(), [&](const Point3& q) { return q == p; });
}

}  // namespace

TEST_CASE("voxel downsample merges one cell into its centroid") {
    PointCloud cloud;
    for (int i = 0; i < 8; ++i) cloud.points.emplace_back(0.1 + 0.01 * (i & 1), 0.1 + 0.01 * ((i >> 1) & 1), 0.1 + 0.01 * (i >> 2));
    const PointCloud out = voxel_downsample(cloud, 1.0);
    REQUIRE(out.size() == 1);
    CHECK((out[0] - Point3(0.105, 0.105, 0.105)).norm() < 1e-15);
}

TEST_CASE("voxel downsample keeps sparse clouds") {
    PointCloud cloud;
    for (int i = 0; i < 20; ++i) cloud.points.emplace_back(0.5 + i * 2.0, -0.5 - i * 3.0, 0.25 + i);
    const PointCloud out = voxel_downsample(cloud, 1.0);
    REQUIRE(out.size() == cloud.size());
    for (const auto& p : cloud) CHECK(contains_exact(out, p));
}

TEST_CASE("voxel downsample cell-count bound and centroid construction") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud cloud;
    for (int i = 0; i < 10000; ++i) cloud.points.emplace_back(u(rng), u(rng), u(rng));
    const PointCloud out = voxel_downsample(cloud, 0.1);
    CHECK(out.size() <= 1000);
    CHECK(out.size() <= cloud.size());

    // Every output is the centroid of the input points in its cell.
    for (const auto& c : out) {
        const Eigen::Vector3d cell = (c / 0.1).array().floor();
        Point3 sum = Point3::Zero();
        int n = 0;
        for (const auto& p : cloud) {
            if (((p / 0.1).array().floor() == cell.array()).all()) {
                sum += p;
                ++n;
            }
        }
        REQUIRE(n > 0);
        CHECK((sum / n - c).norm() < 1e-12);
    }
}

TEST_CASE("voxel downsample rejects non-positive size") {
    PointCloud cloud;
    cloud.points.emplace_back(0, 0, 0);
    CHECK_THROWS_AS(voxel_downsample(cloud, 0.0), Error);
    CHECK_THROWS_AS(voxel_downsample(cloud, -1.0), Error);
    CHECK(voxel_downsample(PointCloud{}, 1.0).empty());
}

TEST_CASE("outlier removal drops a far point") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 0.01);
    PointCloud cloud;
    for (int i = 0; i < 200; ++i) cloud.points.emplace_back(n(rng), n(rng), n(rng));
    const Point3 far(5.0, 5.0, 5.0);
    cloud.points.push_back(far);
    const PointCloud out = remove_outliers(cloud, 10, 1.0);
    CHECK_FALSE(contains_exact(out, far));
    CHECK(out.size() < cloud.size());
}

TEST_CASE("outlier removal keeps a uniform grid") {
    PointCloud cloud;
    // Periodic-looking interior: a grid's boundary points have larger k-NN
    // distances, so use a ring lattice where every point sees the same neighbors.
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * 3.141592653589793 * i / n;
        cloud.points.emplace_back(std::cos(t), std::sin(t), 0.0);
    }
    CHECK(remove_outliers(cloud, 6, 0.0).size() == cloud.size());
}

TEST_CASE("outlier removal finds injected outliers") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud cloud;
    const int inliers = 2000;
    for (int i = 0; i < inliers; ++i) cloud.points.emplace_back(0.1 * u(rng), 0.1 * u(rng), 0.01 * u(rng));
    // Mean spacing of the cluster; outliers sit ten spacings off its surface.
    const double spacing = std::cbrt(0.1 * 0.1 * 0.01 / static_cast<double>(inliers));
    std::set<std::size_t> injected;
    for (int i = 0; i < inliers / 20; ++i) {
        injected.insert(cloud.size());
        cloud.points.emplace_back(0.12 * u(rng) - 0.01, 0.12 * u(rng) - 0.01, 0.01 + 10.0 * spacing);
    }
    const auto keep = outlier_inliers(cloud, 20, 2.0);
    std::size_t removed = 0;
    for (const std::size_t i : injected) removed += !std::binary_search(keep.begin(), keep.end(), i);
    CHECK(static_cast<double>(removed) >= 0.9 * static_cast<double>(injected.size()));

    const PointCloud out = remove_outliers(cloud, 20, 2.0);
    CHECK(out.size() == keep.size());
    for (const auto& p : out) CHECK(contains_exact(cloud, p));
}

TEST_CASE("outlier removal parameter checks") {
    PointCloud cloud;
    for (int i = 0; i < 10; ++i) cloud.points.emplace_back(i, 0, 0);
    CHECK_THROWS_AS(remove_outliers(cloud, 0, 1.0), Error);
    CHECK_THROWS_AS(remove_outliers(cloud, 3, -1.0), Error);
    CHECK_THROWS_AS(remove_outliers(cloud, 10, 1.0), Error);
    CHECK_THROWS_AS(remove_outliers(cloud, 3, std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST_CASE("drop_non_finite") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {std::numeric_limits<double>::quiet_NaN(), 0, 0},
                    {1, std::numeric_limits<double>::infinity(), 0}, {1, 2, 3}};
    const PointCloud out = drop_non_finite(cloud);
    REQUIRE(out.size() == 2);
    CHECK(out[1] == Point3(1, 2, 3));
}
