#pragma once

#include "tubepose/geometry.hpp"
#include "tubepose/rack.hpp"
#include "tubepose/registration.hpp"
#include "tubepose/tube_estimation.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace tubepose {

/// Detector output: point indices into the scene cloud.
struct DetectedTube {
    std::string id;
    TubeSpec spec;
    std::vector<std::size_t> point_indices;
};

struct DetectionsFile {
    std::vector<std::size_t> rack_indices;
    std::vector<DetectedTube> tubes;
};

/// Throws DetectionsRange if any index is past scene_size.
void validate_detections(const DetectionsFile& detections, std::size_t scene_size);

struct PreprocessOptions {
    double voxel = 0.0;  ///< meters, 0 disables downsampling
    bool remove_outliers = true;
    std::size_t outlier_k = 20;
    double outlier_std_ratio = 2.0;
};

/// Drops non-finite points, voxel-downsamples, then removes statistical
/// outliers. Outlier removal is skipped on clouds with at most k points.
PointCloud preprocess(const PointCloud& cloud, const PreprocessOptions& options);

/// Gathers the indexed points. Throws DetectionsRange on an index past the end.
PointCloud gather(const PointCloud& scene, const std::vector<std::size_t>& indices, const std::string& what);

struct PipelineOptions {
    PreprocessOptions rack_preprocess{0.0015, true, 20, 2.0};
    PreprocessOptions tube_preprocess{0.0, false, 20, 2.0};
    IcpParams icp;
    /// Point-to-plane refinement on the full-resolution rack cloud; 0 iterations disables it.
    IcpParams rack_refine{30, 1e-12, 0.005};
    EstimateOptions estimate;
};

struct PipelineTiming {
    double rack_seconds = 0.0;             ///< preprocessing + registration
    std::vector<double> tube_seconds;      ///< per tube, preprocessing + fit
};

struct PipelineResult {
    RackPoseEstimate rack;
    std::vector<TubePoseEstimate> tubes;
    PipelineTiming timing;
};

/// Validates every detection index first, then estimates the rack pose on the
/// preprocessed cloud, refines it on the finite raw rack points, and estimates
/// each tube in detection order.
PipelineResult run_pipeline(const PointCloud& scene, const DetectionsFile& detections, const RackModel& model,
                            const PipelineOptions& options = {});

}  // namespace tubepose
