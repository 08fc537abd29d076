#include "tubepose/serialization.hpp"

#include "tubepose/error.hpp"

#include <fstream>
#include <sstream>

namespace tubepose {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ParseError, where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

template <class T>
T as(const Json& v, const std::string& where) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) fail(where, "expected a number");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(where, "expected a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(where, "expected an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_integer() && !v.is_number_unsigned() && v.template get<long long>() < 0) {
                    fail(where, "expected a non-negative integer");
                }
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(where, "expected a string");
        }
        return v.template get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(where, e.what());
    }
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
    return as<T>(field(j, key, where), where + "." + key);
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const auto it = j.find(key);
    return it == j.end() ? fallback : as<T>(*it, where + "." + key);
}

void check_schema(const Json& j, const char* expected, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    const auto it = j.find("schema");
    if (it != j.end() && (!it->is_string() || it->get<std::string>() != expected)) {
        fail(where, std::string("schema must be '") + expected + "'");
    }
}

Point3 vec3_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) fail(where, "expected an array of 3 numbers");
    return {as<double>(j[0], where + "[0]"), as<double>(j[1], where + "[1]"), as<double>(j[2], where + "[2]")};
}

Json tube_spec_fields(Json j, const TubeSpec& spec) {
    j["class_id"] = spec.class_id;
    j["radius"] = spec.radius;
    j["length"] = spec.length;
    j["capped"] = spec.capped;
    return j;
}

TubeSpec tube_spec_from_json(const Json& j, const std::string& where) {
    TubeSpec spec;
    if (j.contains("class")) spec = synth::tube_class_preset(get<std::string>(j, "class", where)).spec;
    spec.class_id = get_or<std::string>(j, "class_id", spec.class_id, where);
    spec.radius = get_or<double>(j, "radius", spec.radius, where);
    spec.length = get_or<double>(j, "length", spec.length, where);
    spec.capped = get_or<bool>(j, "capped", spec.capped, where);
    if (spec.class_id.empty()) fail(where, "tube needs 'class' or 'class_id'");
    return spec;
}

std::vector<std::size_t> indices_from_json(const Json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of point indices");
    std::vector<std::size_t> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& v = j[i];
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
            throw Error(ErrorCode::DetectionsRange, where + "[" + std::to_string(i) + "]: not a non-negative integer index");
        }
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

synth::Dropout dropout_from_json(const Json& j, const std::string& where) {
    return {get_or<double>(j, "sector_fraction", 0.0, where), get_or<double>(j, "axial_fraction", 0.0, where)};
}

Json dropout_to_json(const synth::Dropout& d) {
    return Json{{"sector_fraction", d.sector_fraction}, {"axial_fraction", d.axial_fraction}};
}

RigidTransform scene_pose_from_json(const Json& j, const std::string& where) {
    if (j.contains("matrix")) return pose_from_json(j["matrix"], where + ".matrix");
    RigidTransform pose;
    const TiltAngles tilt(get_or<double>(j, "alpha", 0.0, where), get_or<double>(j, "beta", 0.0, where));
    pose.rotation = rotation_from_tilt(tilt) * rotation_z(get_or<double>(j, "yaw", 0.0, where));
    if (j.contains("translation")) pose.translation = vec3_from_json(j["translation"], where + ".translation");
    return pose;
}

PoseRecord pose_record_from_json(const Json& t, const std::string& where) {
    PoseRecord r;
    r.id = get<std::string>(t, "id", where);
    r.class_id = get<std::string>(t, "class_id", where);
    r.slot = get<std::size_t>(t, "slot", where);
    r.pose = pose_from_json(field(t, "pose", where), where + ".pose");
    return r;
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

void save_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

Json pose_to_json(const RigidTransform& pose) {
    const Eigen::Matrix4d m = pose.matrix();
    Json rows = Json::array();
    for (int r = 0; r < 4; ++r) rows.push_back(Json{m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
    return rows;
}

RigidTransform pose_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) fail(where, "expected a 4x4 row-major matrix");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 4) fail(where, "expected a 4x4 row-major matrix");
        for (int c = 0; c < 4; ++c) m(r, c) = as<double>(row[static_cast<std::size_t>(c)], where);
    }
    if (!m.allFinite() || m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0 ||
        !is_rotation(m.topLeftCorner<3, 3>(), 1e-6)) {
        fail(where, "matrix is not a rigid transform");
    }
    return RigidTransform::from_matrix(m);
}

Json rack_dimensions_to_json(const RackDimensions& d) {
    return Json{{"schema", kRackModelSchema},   {"half_length", d.half_length},
                {"half_width", d.half_width},   {"slot_depth", d.slot_depth},
                {"rows", d.rows},               {"cols", d.cols},
                {"pitch_x", d.pitch_x},         {"pitch_y", d.pitch_y},
                {"top_height", d.top_height},   {"border", d.border},
                {"label_margin", d.label_margin}, {"template_spacing", d.template_spacing}};
}

RackDimensions rack_dimensions_from_json(const Json& j) {
    const std::string where = "rack-model";
    check_schema(j, kRackModelSchema, where);
    RackDimensions d;
    d.half_length = get_or(j, "half_length", d.half_length, where);
    d.half_width = get_or(j, "half_width", d.half_width, where);
    d.slot_depth = get_or(j, "slot_depth", d.slot_depth, where);
    d.rows = get_or(j, "rows", d.rows, where);
    d.cols = get_or(j, "cols", d.cols, where);
    d.pitch_x = get_or(j, "pitch_x", d.pitch_x, where);
    d.pitch_y = get_or(j, "pitch_y", d.pitch_y, where);
    d.top_height = get_or(j, "top_height", d.top_height, where);
    d.border = get_or(j, "border", d.border, where);
    d.label_margin = get_or(j, "label_margin", d.label_margin, where);
    d.template_spacing = get_or(j, "template_spacing", d.template_spacing, where);
    return d;
}

synth::SceneConfig scene_config_from_json(const Json& j) {
    const std::string where = "scene-config";
    check_schema(j, kSceneConfigSchema, where);
    synth::SceneConfig c;
    if (j.contains("rack")) {
        Json rack = j["rack"];
        rack.erase("schema");
        c.rack = rack_dimensions_from_json(rack);
    }
    if (j.contains("rack_pose")) c.rack_pose = scene_pose_from_json(j["rack_pose"], where + ".rack_pose");
    c.noise_sigma = get_or(j, "noise_sigma", c.noise_sigma, where);
    if (j.contains("dropout")) c.dropout = dropout_from_json(j["dropout"], where + ".dropout");
    c.tube_density = get_or(j, "tube_density", c.tube_density, where);
    c.rack_density = get_or(j, "rack_density", c.rack_density, where);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);

    const Json& tubes = j.contains("tubes") ? j["tubes"] : Json::array();
    if (!tubes.is_array()) fail(where + ".tubes", "expected an array");
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        const std::string tw = where + ".tubes[" + std::to_string(i) + "]";
        const Json& t = tubes[i];
        synth::TubeEntry e;
        e.id = get_or<std::string>(t, "id", "t" + std::to_string(i), tw);
        e.slot = get<std::size_t>(t, "slot", tw);
        e.spec = tube_spec_from_json(t, tw);
        e.tilt = TiltAngles(get_or(t, "alpha", 0.0, tw), get_or(t, "beta", 0.0, tw));
        if (t.contains("dropout")) {
            e.dropout = dropout_from_json(t["dropout"], tw + ".dropout");
        } else if (t.contains("class")) {
            e.dropout = synth::tube_class_preset(t["class"].get<std::string>()).dropout;
        }
        c.tubes.push_back(std::move(e));
    }
    return c;
}

Json scene_config_to_json(const synth::SceneConfig& c) {
    Json rack = rack_dimensions_to_json(c.rack);
    rack.erase("schema");
    Json tubes = Json::array();
    for (const auto& t : c.tubes) {
        Json e{{"id", t.id}, {"slot", t.slot}};
        e = tube_spec_fields(std::move(e), t.spec);
        e["alpha"] = t.tilt.alpha();
        e["beta"] = t.tilt.beta();
        if (t.dropout) e["dropout"] = dropout_to_json(*t.dropout);
        tubes.push_back(std::move(e));
    }
    return Json{{"schema", kSceneConfigSchema},
                {"seed", c.seed},
                {"noise_sigma", c.noise_sigma},
                {"dropout", dropout_to_json(c.dropout)},
                {"tube_density", c.tube_density},
                {"rack_density", c.rack_density},
                {"rack", rack},
                {"rack_pose", Json{{"matrix", pose_to_json(c.rack_pose)}}},
                {"tubes", tubes}};
}

Json detections_to_json(const DetectionsFile& d) {
    Json tubes = Json::array();
    for (const auto& t : d.tubes) {
        Json e{{"id", t.id}};
        e = tube_spec_fields(std::move(e), t.spec);
        e["point_indices"] = t.point_indices;
        tubes.push_back(std::move(e));
    }
    return Json{{"schema", kDetectionsSchema}, {"rack", Json{{"point_indices", d.rack_indices}}}, {"tubes", tubes}};
}

DetectionsFile detections_from_json(const Json& j) {
    const std::string where = "detections";
    check_schema(j, kDetectionsSchema, where);
    DetectionsFile d;
    d.rack_indices = indices_from_json(field(field(j, "rack", where), "point_indices", where + ".rack"),
                                       where + ".rack.point_indices");
    const Json& tubes = field(j, "tubes", where);
    if (!tubes.is_array()) fail(where + ".tubes", "expected an array");
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        const std::string tw = where + ".tubes[" + std::to_string(i) + "]";
        DetectedTube t;
        t.id = get_or<std::string>(tubes[i], "id", "t" + std::to_string(i), tw);
        t.spec = tube_spec_from_json(tubes[i], tw);
        t.point_indices = indices_from_json(field(tubes[i], "point_indices", tw), tw + ".point_indices");
        d.tubes.push_back(std::move(t));
    }
    return d;
}

DetectionsFile detections_of(const synth::SyntheticScene& scene) {
    DetectionsFile d;
    d.rack_indices = scene.rack_indices;
    for (std::size_t i = 0; i < scene.tubes.size(); ++i) {
        d.tubes.push_back({scene.tubes[i].id, scene.tube_specs[i], scene.tube_indices[i]});
    }
    return d;
}

Json results_to_json(const PipelineResult& r, bool include_timing) {
    Json tubes = Json::array();
    for (const auto& t : r.tubes) {
        tubes.push_back(Json{{"id", t.id},
                             {"class_id", t.class_id},
                             {"slot", t.slot.slot_index},
                             {"overlap_fraction", t.slot.overlap_fraction},
                             {"alpha", t.angles.alpha()},
                             {"beta", t.angles.beta()},
                             {"pose", pose_to_json(t.pose)},
                             {"residual", t.residual},
                             {"feasible", t.feasible},
                             {"status", std::string(tube_status_name(t.status))},
                             {"message", t.message}});
    }
    Json doc{{"schema", kResultsSchema},
             {"rack", Json{{"pose", pose_to_json(r.rack.pose)},
                           {"rmse", r.rack.rmse},
                           {"inlier_fraction", r.rack.inlier_fraction},
                           {"hypothesis_index", r.rack.hypothesis_index}}},
             {"tubes", tubes}};
    if (include_timing) {
        doc["timing"] = Json{{"rack_seconds", r.timing.rack_seconds}, {"tube_seconds", r.timing.tube_seconds}};
    }
    return doc;
}

ResultsFile results_from_json(const Json& j) {
    const std::string where = "results";
    check_schema(j, kResultsSchema, where);
    ResultsFile out;
    out.rack_pose = pose_from_json(field(field(j, "rack", where), "pose", where + ".rack"), where + ".rack.pose");
    const Json& tubes = field(j, "tubes", where);
    if (!tubes.is_array()) fail(where + ".tubes", "expected an array");
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        out.tubes.push_back(pose_record_from_json(tubes[i], where + ".tubes[" + std::to_string(i) + "]"));
    }
    return out;
}

Json groundtruth_to_json(const synth::SyntheticScene& scene, std::uint64_t seed) {
    Json tubes = Json::array();
    for (std::size_t i = 0; i < scene.tubes.size(); ++i) {
        const auto& t = scene.tubes[i];
        tubes.push_back(Json{{"id", t.id},
                             {"class_id", t.class_id},
                             {"slot", t.slot},
                             {"alpha", t.tilt.alpha()},
                             {"beta", t.tilt.beta()},
                             {"pose", pose_to_json(t.pose)},
                             {"point_count", scene.tube_indices[i].size()}});
    }
    return Json{{"schema", kGroundTruthSchema},
                {"seed", seed},
                {"point_count", scene.cloud.size()},
                {"rack", Json{{"pose", pose_to_json(scene.rack_pose)}, {"point_count", scene.rack_indices.size()}}},
                {"tubes", tubes}};
}

ResultsFile groundtruth_from_json(const Json& j) {
    const std::string where = "groundtruth";
    check_schema(j, kGroundTruthSchema, where);
    ResultsFile out;
    out.rack_pose = pose_from_json(field(field(j, "rack", where), "pose", where + ".rack"), where + ".rack.pose");
    const Json& tubes = field(j, "tubes", where);
    if (!tubes.is_array()) fail(where + ".tubes", "expected an array");
    for (std::size_t i = 0; i < tubes.size(); ++i) {
        out.tubes.push_back(pose_record_from_json(tubes[i], where + ".tubes[" + std::to_string(i) + "]"));
    }
    return out;
}

Json error_report_to_json(const ErrorReport& report) {
    Json classes = Json::array();
    for (const auto& c : report.classes) {
        classes.push_back(Json{{"class_id", c.class_id},
                               {"count", c.count},
                               {"rx_deg", c.rx_deg},
                               {"ry_deg", c.ry_deg},
                               {"tx_mm", c.tx_mm},
                               {"ty_mm", c.ty_mm},
                               {"tz_mm", c.tz_mm}});
    }
    Json tubes = Json::array();
    for (const auto& t : report.tubes) {
        tubes.push_back(Json{{"id", t.id},
                             {"class_id", t.class_id},
                             {"rx_deg", t.rx_deg},
                             {"ry_deg", t.ry_deg},
                             {"tx_mm", t.tx_mm},
                             {"ty_mm", t.ty_mm},
                             {"tz_mm", t.tz_mm}});
    }
    return Json{{"schema", kErrorReportSchema}, {"trials", report.trials}, {"classes", classes}, {"tubes", tubes}};
}

}  // namespace tubepose
