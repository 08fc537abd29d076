#include "tubepose/pipeline.hpp"

#include "tubepose/error.hpp"
#include "tubepose/filters.hpp"

#include <chrono>

namespace tubepose {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void validate_detections(const DetectionsFile& detections, std::size_t scene_size) {
    auto check = [&](const std::vector<std::size_t>& indices, const std::string& what) {
        for (const std::size_t i : indices) {
            if (i >= scene_size) {
                throw Error(ErrorCode::DetectionsRange, what + " references point " + std::to_string(i) +
                                                            " but the scene has " + std::to_string(scene_size) + " points");
            }
        }
    };
    check(detections.rack_indices, "rack detection");
    for (const auto& t : detections.tubes) check(t.point_indices, "tube '" + t.id + "'");
}

PointCloud preprocess(const PointCloud& cloud, const PreprocessOptions& options) {
    PointCloud out = drop_non_finite(cloud);
    if (options.voxel > 0.0) out = voxel_downsample(out, options.voxel);
    if (options.remove_outliers && out.size() > options.outlier_k) {
        out = remove_outliers(out, options.outlier_k, options.outlier_std_ratio);
    }
    return out;
}

PointCloud gather(const PointCloud& scene, const std::vector<std::size_t>& indices, const std::string& what) {
    PointCloud out;
    out.points.reserve(indices.size());
    for (const std::size_t i : indices) {
        if (i >= scene.size()) {
            throw Error(ErrorCode::DetectionsRange, what + " references point " + std::to_string(i) +
                                                        " but the scene has " + std::to_string(scene.size()) + " points");
        }
        out.points.push_back(scene[i]);
    }
    return out;
}

PipelineResult run_pipeline(const PointCloud& scene, const DetectionsFile& detections, const RackModel& model,
                            const PipelineOptions& options) {
    const PointCloud rack_raw = gather(scene, detections.rack_indices, "rack detection");
    std::vector<PointCloud> tube_raw;
    tube_raw.reserve(detections.tubes.size());
    for (const auto& t : detections.tubes) tube_raw.push_back(gather(scene, t.point_indices, "tube '" + t.id + "'"));

    PipelineResult result;
    auto start = std::chrono::steady_clock::now();
    const PointCloud rack_cloud = preprocess(rack_raw, options.rack_preprocess);
    result.rack = estimate_rack_pose(rack_cloud, model, options.icp);
    if (options.rack_refine.max_iterations > 0) {
        const IcpResult refined = refine_rack_pose(drop_non_finite(rack_raw), model, result.rack.pose, options.rack_refine);
        result.rack.pose = refined.pose.inverse();
        result.rack.rmse = refined.rmse;
        result.rack.inlier_fraction = refined.inlier_fraction;
        result.rack.objective = refined.objective;
    }
    result.timing.rack_seconds = seconds_since(start);

    if (!is_rotation(result.rack.pose.rotation, 1e-6)) {
        throw Error(ErrorCode::InvalidParameter, "rack rotation is not orthonormal");
    }
    for (std::size_t i = 0; i < detections.tubes.size(); ++i) {
        start = std::chrono::steady_clock::now();
        TubeDetection det{detections.tubes[i].id, detections.tubes[i].spec, {}};
        det.cloud = preprocess(tube_raw[i], options.tube_preprocess);
        result.tubes.push_back(estimate_tube(det, result.rack.pose, model, options.estimate));
        result.timing.tube_seconds.push_back(seconds_since(start));
    }
    return result;
}

}  // namespace tubepose
