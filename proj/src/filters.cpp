#include "tubepose/filters.hpp"

#include "tubepose/error.hpp"
#include "tubepose/kdtree.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace tubepose {

namespace {

struct CellKey {
    std::int64_t i, j, k;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& c) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(c.i) * 0x9E3779B97F4A7C15ull;
        h ^= static_cast<std::uint64_t>(c.j) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
        h ^= static_cast<std::uint64_t>(c.k) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
    if (!(voxel > 0.0) || !std::isfinite(voxel)) {
        throw Error(ErrorCode::InvalidParameter, "voxel size must be positive");
    }
    struct Cell {
        Point3 sum;
        std::size_t count;
    };
    std::unordered_map<CellKey, std::size_t, CellHash> slot;
    std::vector<Cell> cells;
    slot.reserve(cloud.size());
    for (const auto& p : cloud) {
        const CellKey key{static_cast<std::int64_t>(std::floor(p.x() / voxel)),
                          static_cast<std::int64_t>(std::floor(p.y() / voxel)),
                          static_cast<std::int64_t>(std::floor(p.z() / voxel))};
        auto [it, inserted] = slot.try_emplace(key, cells.size());
        if (inserted) {
            cells.push_back({p, 1});
        } else {
            cells[it->second].sum += p;
            ++cells[it->second].count;
        }
    }
    PointCloud out;
    out.points.reserve(cells.size());
    for (const auto& c : cells) {
        out.points.push_back(c.count == 1 ? c.sum : Point3(c.sum / static_cast<double>(c.count)));
    }
    return out;
}

std::vector<std::size_t> outlier_inliers(const PointCloud& cloud, std::size_t k, double std_ratio) {
    if (k < 1) throw Error(ErrorCode::InvalidParameter, "outlier filter needs k >= 1");
    if (!(std_ratio >= 0.0) || !std::isfinite(std_ratio)) {
        throw Error(ErrorCode::InvalidParameter, "outlier filter std_ratio must be finite and non-negative");
    }
    if (cloud.size() <= k) throw Error(ErrorCode::InvalidParameter, "outlier filter needs more than k points");

    const KdTree tree(cloud);
    std::vector<double> mean_dist(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        // k + 1 because the query point is its own nearest neighbor.
        const auto nn = tree.k_nearest(cloud[i], k + 1);
        double sum = 0.0;
        std::size_t used = 0;
        bool self_skipped = false;
        for (const auto& n : nn) {
            if (!self_skipped && n.index == i) {
                self_skipped = true;
                continue;
            }
            if (used == k) break;
            sum += n.distance;
            ++used;
        }
        mean_dist[i] = sum / static_cast<double>(used);
    }

    double mean = 0.0;
    for (double d : mean_dist) mean += d;
    mean /= static_cast<double>(mean_dist.size());
    double var = 0.0;
    for (double d : mean_dist) var += (d - mean) * (d - mean);
    const double stddev = std::sqrt(var / static_cast<double>(mean_dist.size()));
    // Rounding spread on equal distances must not count as deviation.
    const double threshold = mean + std_ratio * stddev + 1e-12 * mean;

    std::vector<std::size_t> keep;
    keep.reserve(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (mean_dist[i] <= threshold) keep.push_back(i);
    }
    return keep;
}

PointCloud remove_outliers(const PointCloud& cloud, std::size_t k, double std_ratio) {
    PointCloud out;
    for (std::size_t i : outlier_inliers(cloud, k, std_ratio)) out.points.push_back(cloud[i]);
    return out;
}

PointCloud drop_non_finite(const PointCloud& cloud) {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud) {
        if (p.allFinite()) out.points.push_back(p);
    }
    return out;
}

}  // namespace tubepose
