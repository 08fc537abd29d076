#pragma once

#include "tubepose/geometry.hpp"

#include <cstddef>
#include <vector>

namespace tubepose {

/// One centroid per occupied voxel cell, in order of first occupancy.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

/// Statistical outlier filter: drops points whose mean distance to their k
/// nearest neighbors exceeds mean + std_ratio * stddev over the cloud.
/// Surviving points keep their relative order.
PointCloud remove_outliers(const PointCloud& cloud, std::size_t k = 20, double std_ratio = 2.0);

/// Indices (ascending) of the points remove_outliers would keep.
std::vector<std::size_t> outlier_inliers(const PointCloud& cloud, std::size_t k = 20, double std_ratio = 2.0);

/// Drops non-finite points.
PointCloud drop_non_finite(const PointCloud& cloud);

}  // namespace tubepose
