#include "tubepose/kdtree.hpp"

#include "tubepose/error.hpp"
#include "tubepose/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace tubepose {

KdTree::KdTree(const PointCloud& cloud, std::size_t leaf_size) : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::InvalidParameter, "cloud too large for kd-tree");
    }
    order_.resize(cloud.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (!cloud.empty()) build(0, static_cast<std::uint32_t>(cloud.size()), cloud);

    x_.reserve(order_.size());
    y_.reserve(order_.size());
    z_.reserve(order_.size());
    for (std::size_t i : order_) {
        x_.push_back(cloud[i].x());
        y_.push_back(cloud[i].y());
        z_.push_back(cloud[i].z());
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, const PointCloud& cloud) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_[id].begin = begin;
    nodes_[id].end = end;

    const auto first = order_.begin() + begin;
    const auto last = order_.begin() + end;
    if (end - begin <= leaf_size_) {
        std::sort(first, last);
        return id;
    }

    Eigen::Vector3d lo = cloud[*first], hi = lo;
    for (auto it = first; it != last; ++it) {
        lo = lo.cwiseMin(cloud[*it]);
        hi = hi.cwiseMax(cloud[*it]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(first, order_.begin() + mid, last, [&](std::size_t a, std::size_t b) {
        const double ca = cloud[a][axis], cb = cloud[b][axis];
        return ca < cb || (ca == cb && a < b);
    });
    const double split = cloud[order_[mid]][axis];

    const std::int32_t left = build(begin, mid, cloud);
    const std::int32_t right = build(mid, end, cloud);
    nodes_[id].axis = static_cast<std::uint8_t>(axis);
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

Neighbor KdTree::nearest(const Point3& query) const {
    if (order_.empty()) throw Error(ErrorCode::EmptyCloud, "nearest neighbor query on empty cloud");

    std::size_t best_index = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();

    struct Pending {
        std::int32_t node;
        double bound;  // squared distance lower bound to the node's half-space
    };
    Pending stack[128];
    int top = 0;
    stack[top++] = {0, 0.0};
    while (top > 0) {
        const Pending item = stack[--top];
        if (item.bound > best_d2) continue;
        const Node& node = nodes_[item.node];
        if (node.leaf()) {
            const auto hit = kernels::nearest_in_block(x_.data() + node.begin, y_.data() + node.begin,
                                                       z_.data() + node.begin, node.end - node.begin, query);
            const std::size_t idx = order_[node.begin + hit.index];
            if (hit.squared_distance < best_d2 || (hit.squared_distance == best_d2 && idx < best_index)) {
                best_d2 = hit.squared_distance;
                best_index = idx;
            }
            continue;
        }
        const double diff = query[node.axis] - node.split;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        stack[top++] = {far, std::max(item.bound, diff * diff)};
        stack[top++] = {near, item.bound};
    }
    return {best_index, std::sqrt(best_d2)};
}

std::vector<Neighbor> KdTree::k_nearest(const Point3& query, std::size_t k) const {
    std::vector<Neighbor> out;
    if (k == 0 || order_.empty()) return out;

    using Entry = std::pair<double, std::size_t>;  // (squared distance, cloud index); max-heap
    std::priority_queue<Entry> heap;
    auto worst = [&] {
        return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
    };

    struct Pending {
        std::int32_t node;
        double bound;
    };
    std::vector<Pending> stack{{0, 0.0}};
    while (!stack.empty()) {
        const Pending item = stack.back();
        stack.pop_back();
        if (item.bound > worst()) continue;
        const Node& node = nodes_[item.node];
        if (node.leaf()) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const double dx = x_[i] - query.x(), dy = y_[i] - query.y(), dz = z_[i] - query.z();
                const Entry e{dx * dx + dy * dy + dz * dz, order_[i]};
                if (heap.size() < k) {
                    heap.push(e);
                } else if (e < heap.top()) {
                    heap.pop();
                    heap.push(e);
                }
            }
            continue;
        }
        const double diff = query[node.axis] - node.split;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        stack.push_back({far, std::max(item.bound, diff * diff)});
        stack.push_back({near, item.bound});
    }

    out.resize(heap.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = {heap.top().second, std::sqrt(heap.top().first)};
        heap.pop();
    }
    return out;
}

Neighbor nearest_neighbor_index(const Point3& query, const PointCloud& target) {
    if (target.empty()) throw Error(ErrorCode::EmptyCloud, "nearest neighbor query on empty cloud");
    const kernels::SoaPoints soa(target);
    const auto hit = kernels::nearest_in_block(soa.x.data(), soa.y.data(), soa.z.data(), soa.size(), query);
    return {hit.index, std::sqrt(hit.squared_distance)};
}

}  // namespace tubepose
