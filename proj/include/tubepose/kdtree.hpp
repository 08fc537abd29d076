#pragma once

#include "tubepose/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tubepose {

struct Neighbor {
    std::size_t index = 0;  ///< position in the cloud the tree was built from
    double distance = 0.0;
};

/// Static 3-d tree over a point cloud. Read-only after construction, so
/// concurrent queries are safe. Leaves are scanned with the SIMD block kernel.
/// Exact: ties resolve to the lowest cloud index, matching a linear scan.
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 16);

    std::size_t size() const noexcept { return order_.size(); }

    /// Throws EmptyCloud on an empty tree.
    Neighbor nearest(const Point3& query) const;

    /// k nearest, ascending by distance. Returns fewer when the tree is smaller.
    std::vector<Neighbor> k_nearest(const Point3& query, std::size_t k) const;

private:
    struct Node {
        double split = 0.0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint8_t axis = 0;
        bool leaf() const noexcept { return left < 0; }
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end, const PointCloud& cloud);

    std::vector<Node> nodes_;
    std::vector<std::size_t> order_;  // leaf-ordered position -> cloud index
    std::vector<double> x_, y_, z_;  // leaf-ordered coordinates
    std::size_t leaf_size_;
};

/// One-shot query by exhaustive block scan. Throws EmptyCloud.
Neighbor nearest_neighbor_index(const Point3& query, const PointCloud& target);

}  // namespace tubepose
