#pragma once

#include "tubepose/evaluation.hpp"
#include "tubepose/pipeline.hpp"
#include "tubepose/rack.hpp"
#include "tubepose/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tubepose {

using Json = nlohmann::ordered_json;

inline constexpr const char* kRackModelSchema = "tubepose/rack-model/v1";
inline constexpr const char* kSceneConfigSchema = "tubepose/scene-config/v1";
inline constexpr const char* kDetectionsSchema = "tubepose/detections/v1";
inline constexpr const char* kResultsSchema = "tubepose/results/v1";
inline constexpr const char* kGroundTruthSchema = "tubepose/groundtruth/v1";
inline constexpr const char* kErrorReportSchema = "tubepose/error-report/v1";
inline constexpr const char* kBenchReportSchema = "tubepose/bench-report/v1";

/// Parse failures raise ParseError naming the offending field; I/O failures
/// raise IoError.
Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& doc);

/// 4x4 row-major nested arrays. Reading checks the matrix is a rigid transform.
Json pose_to_json(const RigidTransform& pose);
RigidTransform pose_from_json(const Json& j, const std::string& where);

Json rack_dimensions_to_json(const RackDimensions& dims);
RackDimensions rack_dimensions_from_json(const Json& j);

/// Tubes may name a class preset ("class": "tube1") and override any of its
/// fields. Angles are radians, lengths meters.
synth::SceneConfig scene_config_from_json(const Json& j);
Json scene_config_to_json(const synth::SceneConfig& config);

Json detections_to_json(const DetectionsFile& detections);
DetectionsFile detections_from_json(const Json& j);
DetectionsFile detections_of(const synth::SyntheticScene& scene);

/// Timing goes under the "timing" key only, so the rest is deterministic.
Json results_to_json(const PipelineResult& result, bool include_timing = true);
struct ResultsFile {
    RigidTransform rack_pose;
    std::vector<PoseRecord> tubes;
};
ResultsFile results_from_json(const Json& j);

Json groundtruth_to_json(const synth::SyntheticScene& scene, std::uint64_t seed);
ResultsFile groundtruth_from_json(const Json& j);

Json error_report_to_json(const ErrorReport& report);

}  // namespace tubepose
