#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/registration.hpp"
#include "tubepose/tube_estimation.hpp"

namespace tubepose {

/// Complete cylinder (lateral surface, plus the top disc for capped tubes) on a
/// regular grid of the given spacing, tube frame: axis +z, bottom center at 0.
PointCloud cylinder_template(const TubeSpec& spec, double spacing = 0.001);

/// Comparison method: unconstrained 6-DoF ICP of a full cylinder template onto
/// the detection cloud. Starts upright with respect to the rack, centered on
/// the cloud's centroid. Ignores slots and feasibility.
RigidTransform fit_tube_icp_baseline(const PointCloud& cloud, const TubeSpec& spec, const RigidTransform& rack_pose,
                                     const IcpParams& params = {50, 1e-6, 0.01});

}  // namespace tubepose
