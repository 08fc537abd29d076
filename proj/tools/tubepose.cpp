#include "tubepose/baseline.hpp"
#include "tubepose/error.hpp"
#include "tubepose/evaluation.hpp"
#include "tubepose/pipeline.hpp"
#include "tubepose/ply.hpp"
#include "tubepose/serialization.hpp"
#include "tubepose/synthetic.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tubepose;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEstimation = 3;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateInput:
        case ErrorCode::EmptyCloud:
        case ErrorCode::NoCorrespondences:
        case ErrorCode::NoOverlap: return kExitEstimation;
        default: return kExitInput;
    }
}

void report_error(const std::string& code, const std::string& message, const std::string& stage) {
    const Json record{{"error", Json{{"code", code}, {"message", message}, {"stage", stage}}}};
    std::cerr << record.dump() << std::endl;
}

struct EstimateArgs {
    std::string scene, detections, rack, out, debug_cloud;
    int max_iterations = 50;
    double voxel = 0.0015;
    std::string residual_mode = "l1";
    double max_residual = 0.002;
    bool no_timing = false;
};

struct SynthArgs {
    std::string config, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> noise_sigma;
    bool ascii = false;
};

struct EvalArgs {
    std::vector<std::string> results, groundtruth;
    std::string json_out, match = "id";
};

struct BenchArgs {
    std::vector<std::string> configs;
    std::size_t random_scenes = 0;
    std::size_t tubes = 3;
    std::string tube_class = "tube2";
    std::size_t repetitions = 1;
    std::uint64_t seed = 1;
    std::optional<double> noise_sigma;
    std::string json_out;
    int max_iterations = 50;
    double voxel = 0.0015;
};

PipelineOptions pipeline_options(int max_iterations, double voxel, const std::string& mode, double max_residual) {
    if (voxel < 0.0) throw Error(ErrorCode::InvalidParameter, "--voxel must be >= 0");
    if (!(max_residual > 0.0)) throw Error(ErrorCode::InvalidParameter, "--max-residual must be > 0");
    PipelineOptions o;
    o.icp.max_iterations = max_iterations;
    o.rack_preprocess.voxel = voxel;
    o.estimate.fit.mode = mode == "l2" ? kernels::ResidualMode::L2 : kernels::ResidualMode::L1;
    o.estimate.max_residual = max_residual;
    return o;
}

void write_debug_cloud(const fs::path& path, const PointCloud& scene, const DetectionsFile& detections,
                       const PipelineResult& result) {
    static const Rgb palette[] = {{230, 25, 75},  {60, 180, 75},  {0, 130, 200}, {245, 130, 48},
                                  {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60}};
    PointCloud cloud;
    std::vector<Rgb> colors;
    for (const std::size_t i : detections.rack_indices) {
        cloud.points.push_back(scene[i]);
        colors.push_back({160, 160, 160});
    }
    for (std::size_t t = 0; t < detections.tubes.size(); ++t) {
        const Rgb c = palette[t % std::size(palette)];
        for (const std::size_t i : detections.tubes[t].point_indices) {
            cloud.points.push_back(scene[i]);
            colors.push_back(c);
        }
        if (t < result.tubes.size() && result.tubes[t].status == TubeStatus::Ok) {
            const Rgb fitted{static_cast<std::uint8_t>(c[0] / 2), static_cast<std::uint8_t>(c[1] / 2),
                             static_cast<std::uint8_t>(c[2] / 2)};
            for (const auto& p : cylinder_template(detections.tubes[t].spec, 0.002)) {
                cloud.points.push_back(result.tubes[t].pose.apply(p));
                colors.push_back(fitted);
            }
        }
    }
    write_ply(path, cloud, {}, &colors);
}

int run_estimate(const EstimateArgs& a, std::string& stage) {
    stage = "options";
    const PipelineOptions options = pipeline_options(a.max_iterations, a.voxel, a.residual_mode, a.max_residual);
    stage = "rack-model";
    const RackModel model(rack_dimensions_from_json(load_json(a.rack)));
    stage = "scene";
    const PointCloud scene = read_ply(fs::path(a.scene));
    stage = "detections";
    const DetectionsFile detections = detections_from_json(load_json(a.detections));
    validate_detections(detections, scene.size());
    stage = "estimation";
    const PipelineResult result = run_pipeline(scene, detections, model, options);
    stage = "output";
    save_json(a.out, results_to_json(result, !a.no_timing));
    if (!a.debug_cloud.empty()) write_debug_cloud(a.debug_cloud, scene, detections, result);

    std::size_t ok = 0;
    for (const auto& t : result.tubes) ok += t.status == TubeStatus::Ok;
    std::printf("rack rmse %.3f mm, %zu/%zu tubes OK, results in %s\n", result.rack.rmse * 1000.0, ok,
                result.tubes.size(), a.out.c_str());
    return 0;
}

int run_synth(const SynthArgs& a, std::string& stage) {
    stage = "config";
    synth::SceneConfig config = scene_config_from_json(load_json(a.config));
    if (a.seed) config.seed = *a.seed;
    if (a.noise_sigma) config.noise_sigma = *a.noise_sigma;
    stage = "generation";
    const synth::SyntheticScene scene = synth::generate_scene(config);
    stage = "output";
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_ply(dir / "scene.ply", scene.cloud,
              {a.ascii ? PlyEncoding::Ascii : PlyEncoding::BinaryLittleEndian, PlyScalar::Float64});
    save_json(dir / "detections.json", detections_to_json(detections_of(scene)));
    save_json(dir / "groundtruth.json", groundtruth_to_json(scene, config.seed));
    save_json(dir / "rack-model.json", rack_dimensions_to_json(config.rack));
    std::printf("%zu points, %zu tubes written to %s\n", scene.cloud.size(), scene.tubes.size(), dir.c_str());
    return 0;
}

int run_eval(const EvalArgs& a, std::string& stage) {
    stage = "inputs";
    if (a.results.size() != a.groundtruth.size() || a.results.empty()) {
        throw Error(ErrorCode::InvalidParameter, "give one --groundtruth per --results");
    }
    std::vector<Trial> trials;
    for (std::size_t i = 0; i < a.results.size(); ++i) {
        trials.push_back({results_from_json(load_json(a.results[i])).tubes,
                          groundtruth_from_json(load_json(a.groundtruth[i])).tubes});
    }
    stage = "evaluation";
    const ErrorReport report = evaluate_trials(trials, a.match == "slot" ? MatchBy::Slot : MatchBy::Id);
    std::fputs(format_error_table(report).c_str(), stdout);
    if (!a.json_out.empty()) {
        stage = "output";
        save_json(a.json_out, error_report_to_json(report));
    }
    return 0;
}

struct Stats {
    std::size_t samples = 0;
    double mean = 0.0;
    double std = 0.0;
};

Stats stats_of(const std::vector<double>& v) {
    Stats s;
    s.samples = v.size();
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (const double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

int run_bench(const BenchArgs& a, std::string& stage) {
    stage = "inputs";
    if (a.repetitions < 1) throw Error(ErrorCode::InvalidParameter, "--repetitions must be >= 1");
    std::vector<synth::SceneConfig> configs;
    for (const auto& path : a.configs) configs.push_back(scene_config_from_json(load_json(path)));
    synth::RandomSceneOptions random;
    random.tube_count = a.tubes;
    random.tube_class = a.tube_class;
    if (a.noise_sigma) random.noise_sigma = *a.noise_sigma;
    for (std::size_t i = 0; i < a.random_scenes; ++i) configs.push_back(synth::random_scene_config(random, a.seed + i));
    if (configs.empty()) throw Error(ErrorCode::InvalidParameter, "no scenes: give --config or --random-scenes");
    const PipelineOptions options = pipeline_options(a.max_iterations, a.voxel, "l1", 0.002);

    std::vector<double> rack_times, tube_times;
    for (const auto& config : configs) {
        stage = "generation";
        const synth::SyntheticScene scene = synth::generate_scene(config);
        const DetectionsFile detections = detections_of(scene);
        const RackModel model(config.rack);
        stage = "estimation";
        for (std::size_t r = 0; r < a.repetitions; ++r) {
            const PipelineResult result = run_pipeline(scene.cloud, detections, model, options);
            rack_times.push_back(result.timing.rack_seconds);
            tube_times.insert(tube_times.end(), result.timing.tube_seconds.begin(), result.timing.tube_seconds.end());
        }
    }

    const Stats rack = stats_of(rack_times);
    const Stats tube = stats_of(tube_times);
    const bool low_confidence = rack.samples < 10;
    const char* note = "Object detection stage omitted: detections are supplied as input.";
    std::printf("%s\nTimes include preprocessing.\n", note);
    std::printf("%-28s %8s %12s %12s\n", "stage", "samples", "mean(s)", "std(s)");
    std::printf("%-28s %8zu %12.6f %12.6f\n", "Rack Pose Estimation", rack.samples, rack.mean, rack.std);
    std::printf("%-28s %8zu %12.6f %12.6f\n", "Tube Pose Estimation", tube.samples, tube.mean, tube.std);
    if (low_confidence) std::printf("LOW CONFIDENCE: fewer than 10 rack samples\n");

    if (!a.json_out.empty()) {
        stage = "output";
        auto row = [](const char* name, const Stats& s) {
            return Json{{"stage", name}, {"samples", s.samples}, {"mean_seconds", s.mean}, {"std_seconds", s.std}};
        };
        save_json(a.json_out, Json{{"schema", kBenchReportSchema},
                                   {"note", note},
                                   {"scenes", configs.size()},
                                   {"repetitions", a.repetitions},
                                   {"low_confidence", low_confidence},
                                   {"rows", Json::array({row("rack_pose_estimation", rack), row("tube_pose_estimation", tube)})}});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slot-constrained tube pose estimation from rack point clouds"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate rack and tube poses");
    estimate->add_option("--scene", est.scene, "Scene point cloud (PLY)")->required();
    estimate->add_option("--detections", est.detections, "Detections JSON")->required();
    estimate->add_option("--rack", est.rack, "Rack model JSON")->required();
    estimate->add_option("--out", est.out, "Results JSON")->required();
    estimate->add_option("--max-iterations", est.max_iterations, "ICP iteration cap")->check(CLI::NonNegativeNumber);
    estimate->add_option("--voxel", est.voxel, "Rack voxel size in meters, 0 disables");
    estimate->add_option("--residual-mode", est.residual_mode, "Tilt objective")->check(CLI::IsMember({"l1", "l2"}));
    estimate->add_option("--max-residual", est.max_residual, "Residual gate in meters");
    estimate->add_option("--debug-cloud", est.debug_cloud, "Write a colored PLY with fitted cylinders");
    estimate->add_flag("--no-timing", est.no_timing, "Omit timing from the results");

    SynthArgs syn;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene");
    synth_cmd->add_option("--config", syn.config, "Scene config JSON")->required();
    synth_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();
    synth_cmd->add_option("--seed", syn.seed, "Override the config seed");
    synth_cmd->add_option("--noise-sigma", syn.noise_sigma, "Override the noise sigma in meters");
    synth_cmd->add_flag("--ascii", syn.ascii, "Write ASCII PLY");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Compare results against ground truth");
    eval->add_option("--results", ev.results, "Results JSON (repeatable)")->required();
    eval->add_option("--groundtruth", ev.groundtruth, "Ground truth JSON, one per --results")->required();
    eval->add_option("--json", ev.json_out, "Write the report as JSON");
    eval->add_option("--match", ev.match, "Pair tubes by id or slot")->check(CLI::IsMember({"id", "slot"}));

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Time rack and tube estimation");
    bench->add_option("--config", bn.configs, "Scene config JSON (repeatable)");
    bench->add_option("--random-scenes", bn.random_scenes, "Number of random scenes");
    bench->add_option("--tubes", bn.tubes, "Tubes per random scene");
    bench->add_option("--class", bn.tube_class, "Tube class for random scenes")
        ->check(CLI::IsMember({"tube1", "tube2", "tube3"}));
    bench->add_option("--repetitions", bn.repetitions, "Runs per scene");
    bench->add_option("--seed", bn.seed, "First random scene seed");
    bench->add_option("--noise-sigma", bn.noise_sigma, "Noise sigma for random scenes");
    bench->add_option("--json", bn.json_out, "Write the report as JSON");
    bench->add_option("--max-iterations", bn.max_iterations, "ICP iteration cap")->check(CLI::NonNegativeNumber);
    bench->add_option("--voxel", bn.voxel, "Rack voxel size in meters, 0 disables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("E_USAGE", e.what(), "arguments");
        return kExitInput;
    }

    std::string stage = "start";
    try {
        if (*estimate) return run_estimate(est, stage);
        if (*synth_cmd) return run_synth(syn, stage);
        if (*eval) return run_eval(ev, stage);
        return run_bench(bn, stage);
    } catch (const Error& e) {
        report_error(std::string(error_code_name(e.code())), e.what(), stage);
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        report_error("E_IO", e.what(), stage);
        return kExitInput;
    } catch (const std::exception& e) {
        report_error("E_INTERNAL", e.what(), stage);
        return kExitEstimation;
    }
}
