#include "tubepose/error.hpp"
#include "tubepose/geometry.hpp"
#include "tubepose/kdtree.hpp"
#include "tubepose/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tubepose;
using namespace tubepose::kernels;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    PointCloud c;
    for (std::size_t i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
    return c;
}

Neighbor linear_scan(const Point3& q, const PointCloud& cloud) {
    Neighbor best{0, std::numeric_limits<double>::infinity()};
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const double d2 = (cloud[i] - q).squaredNorm();
        if (d2 < best2) {
            best2 = d2;
            best.index = i;
        }
    }
    best.distance = std::sqrt(best2);
    return best;
}

double residual_oracle(const PointCloud& cloud, const Point3& d, double r, ResidualMode mode) {
    double s = 0.0;
    for (const auto& p : cloud) {
        const double e = p.cross(d).norm() - r;
        s += mode == ResidualMode::L1 ? std::abs(e) : e * e;
    }
    return s;
}

struct IsaGuard {
    Isa saved = active_isa();
    ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar is always available and selectable") {
    const auto isas = available_isas();
    REQUIRE_FALSE(isas.empty());
    CHECK(isas.front() == Isa::Scalar);
    IsaGuard guard;
    for (const Isa isa : isas) {
        set_active_isa(isa);
        CHECK(active_isa() == isa);
        CHECK_FALSE(isa_name(isa).empty());
    }
    for (const Isa isa : {Isa::Avx2, Isa::Neon}) {
        if (std::find(isas.begin(), isas.end(), isa) == isas.end()) CHECK_THROWS_AS(set_active_isa(isa), Error);
    }
}

TEST_CASE("radial residual kernels agree with the scalar reference and an oracle") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    IsaGuard guard;
    for (const std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 100u, 1001u, 4096u}) {
        const PointCloud cloud = random_cloud(rng, n, 0.05);
        const SoaPoints soa(cloud);
        const Point3 d = Point3(u(rng), u(rng), u(rng)).normalized();
        const double r = 0.006 + 0.01 * std::abs(u(rng));
        for (const ResidualMode mode : {ResidualMode::L1, ResidualMode::L2}) {
            const double ref = scalar::radial_residual_sum(soa.x.data(), soa.y.data(), soa.z.data(), n, d.data(), r, mode);
            CHECK(ref == doctest::Approx(residual_oracle(cloud, d, r, mode)).epsilon(1e-12));
            for (const Isa isa : available_isas()) {
                set_active_isa(isa);
                // Lane-wise partial sums change the summation order only.
                CHECK(radial_residual_sum(soa, d, r, mode) == doctest::Approx(ref).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("nearest-in-block kernels are bit-identical to the scalar reference") {
    std::mt19937_64 rng(43);
    IsaGuard guard;
    for (const std::size_t n : {1u, 2u, 3u, 4u, 5u, 8u, 13u, 16u, 33u, 257u}) {
        const PointCloud cloud = random_cloud(rng, n);
        const SoaPoints soa(cloud);
        for (int q = 0; q < 50; ++q) {
            const Point3 query = random_cloud(rng, 1)[0];
            const NearestHit ref = scalar::nearest_in_block(soa.x.data(), soa.y.data(), soa.z.data(), n, query.data());
            CHECK(ref.index == linear_scan(query, cloud).index);
            for (const Isa isa : available_isas()) {
                set_active_isa(isa);
                const NearestHit hit = nearest_in_block(soa.x.data(), soa.y.data(), soa.z.data(), n, query);
                CHECK(hit.index == ref.index);
                CHECK(hit.squared_distance == ref.squared_distance);
            }
        }
    }
}

TEST_CASE("nearest-in-block ties go to the lowest index") {
    PointCloud cloud;
    for (int i = 0; i < 11; ++i) cloud.points.emplace_back(i % 2 ? 1.0 : -1.0, 0.0, 0.0);
    const SoaPoints soa(cloud);
    IsaGuard guard;
    for (const Isa isa : available_isas()) {
        set_active_isa(isa);
        CHECK(nearest_in_block(soa.x.data(), soa.y.data(), soa.z.data(), cloud.size(), Point3(0, 0, 0)).index == 0);
        CHECK(nearest_in_block(soa.x.data(), soa.y.data(), soa.z.data(), cloud.size(), Point3(0.5, 0, 0)).index == 1);
    }
}

TEST_CASE("kd-tree nearest matches a linear scan exactly") {
    std::mt19937_64 rng(47);
    const PointCloud cloud = random_cloud(rng, 10000);
    const KdTree tree(cloud);
    IsaGuard guard;
    for (const Isa isa : available_isas()) {
        set_active_isa(isa);
        for (int q = 0; q < 100; ++q) {
            const Point3 query = random_cloud(rng, 1, 1.2)[0];
            const Neighbor oracle = linear_scan(query, cloud);
            const Neighbor hit = tree.nearest(query);
            CHECK(hit.index == oracle.index);
            CHECK(hit.distance == oracle.distance);
            const Neighbor flat = nearest_neighbor_index(query, cloud);
            CHECK(flat.index == oracle.index);
        }
    }
}

TEST_CASE("kd-tree small cases") {
    PointCloud two;
    two.points = {{0, 0, 0}, {1, 0, 0}};
    CHECK(KdTree(two).nearest({0.2, 0, 0}).index == 0);
    CHECK(nearest_neighbor_index({0.2, 0, 0}, two).index == 0);
    const Neighbor self = KdTree(two).nearest({1, 0, 0});
    CHECK(self.index == 1);
    CHECK(self.distance == 0.0);
    CHECK_THROWS_AS(KdTree(PointCloud{}).nearest({0, 0, 0}), Error);
    CHECK_THROWS_AS(nearest_neighbor_index({0, 0, 0}, PointCloud{}), Error);

    PointCloud dup;
    for (int i = 0; i < 40; ++i) dup.points.emplace_back(0.5, 0.5, 0.5);
    CHECK(KdTree(dup).nearest({0, 0, 0}).index == 0);
}

TEST_CASE("kd-tree k nearest matches a sorted scan") {
    std::mt19937_64 rng(53);
    const PointCloud cloud = random_cloud(rng, 3000);
    const KdTree tree(cloud);
    for (int q = 0; q < 30; ++q) {
        const Point3 query = random_cloud(rng, 1)[0];
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t i = 0; i < cloud.size(); ++i) all.emplace_back((cloud[i] - query).norm(), i);
        std::sort(all.begin(), all.end());
        const auto knn = tree.k_nearest(query, 12);
        REQUIRE(knn.size() == 12);
        for (std::size_t k = 0; k < knn.size(); ++k) {
            CHECK(knn[k].distance == doctest::Approx(all[k].first).epsilon(1e-15));
            CHECK(knn[k].index == all[k].second);
        }
    }
    CHECK(tree.k_nearest({0, 0, 0}, 5000).size() == cloud.size());
}
