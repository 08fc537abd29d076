#include "tubepose/baseline.hpp"

#include "tubepose/error.hpp"

#include <cmath>
#include <numbers>

namespace tubepose {

PointCloud cylinder_template(const TubeSpec& spec, double spacing) {
    if (!(spacing > 0.0) || !(spec.radius > 0.0) || !(spec.length > 0.0)) {
        throw Error(ErrorCode::InvalidParameter, "cylinder template needs positive dimensions");
    }
    PointCloud out;
    const int around = std::max(8, static_cast<int>(std::ceil(2.0 * std::numbers::pi * spec.radius / spacing)));
    const int along = std::max(2, static_cast<int>(std::ceil(spec.length / spacing)) + 1);
    for (int j = 0; j < along; ++j) {
        const double z = spec.length * j / (along - 1);
        for (int i = 0; i < around; ++i) {
            const double t = 2.0 * std::numbers::pi * i / around;
            out.points.emplace_back(spec.radius * std::cos(t), spec.radius * std::sin(t), z);
        }
    }
    if (spec.capped) {
        for (double x = -spec.radius; x <= spec.radius; x += spacing) {
            for (double y = -spec.radius; y <= spec.radius; y += spacing) {
                if (x * x + y * y < spec.radius * spec.radius) out.points.emplace_back(x, y, spec.length);
            }
        }
    }
    return out;
}

RigidTransform fit_tube_icp_baseline(const PointCloud& cloud, const TubeSpec& spec, const RigidTransform& rack_pose,
                                     const IcpParams& params) {
    if (cloud.empty()) throw Error(ErrorCode::EmptyCloud, "baseline fit on empty cloud");
    const PointCloud tmpl = cylinder_template(spec);
    RigidTransform init;
    init.rotation = rack_pose.rotation;
    init.translation = centroid(cloud) - init.rotation * centroid(tmpl);
    return icp(tmpl, cloud, init, params).pose;
}

}  // namespace tubepose
