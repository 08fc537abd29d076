#include "tubepose/evaluation.hpp"

#include "tubepose/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

namespace tubepose {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

std::string key_of(const PoseRecord& r, MatchBy match) {
    return match == MatchBy::Id ? r.id : std::to_string(r.slot);
}

std::vector<TubeError> pair_errors(std::span<const PoseRecord> estimates, std::span<const PoseRecord> ground_truth,
                                   MatchBy match) {
    std::map<std::string, const PoseRecord*> truth;
    for (const auto& g : ground_truth) {
        if (!truth.emplace(key_of(g, match), &g).second) {
            throw Error(ErrorCode::IdentityMismatch, "duplicate ground-truth tube '" + key_of(g, match) + "'");
        }
    }
    if (estimates.size() != ground_truth.size()) {
        throw Error(ErrorCode::IdentityMismatch, std::to_string(estimates.size()) + " estimates vs " +
                                                     std::to_string(ground_truth.size()) + " ground-truth tubes");
    }
    std::vector<TubeError> out;
    out.reserve(estimates.size());
    for (const auto& e : estimates) {
        const auto it = truth.find(key_of(e, match));
        if (it == truth.end() || it->second == nullptr) {
            throw Error(ErrorCode::IdentityMismatch, "no ground truth for tube '" + key_of(e, match) + "'");
        }
        const PoseRecord& g = *it->second;
        it->second = nullptr;
        const TiltAngles te = tilt_from_direction(Point3(e.pose.rotation.col(2)));
        const TiltAngles tg = tilt_from_direction(Point3(g.pose.rotation.col(2)));
        const Point3 dt = (e.pose.translation - g.pose.translation).cwiseAbs() * 1000.0;
        out.push_back({e.id, g.class_id, std::abs(normalize_angle(te.alpha() - tg.alpha())) * kDeg,
                       std::abs(normalize_angle(te.beta() - tg.beta())) * kDeg, dt.x(), dt.y(), dt.z()});
    }
    return out;
}

std::vector<ClassMean> class_means(const std::vector<TubeError>& tubes) {
    std::map<std::string, ClassMean> acc;
    for (const auto& t : tubes) {
        ClassMean& m = acc[t.class_id];
        m.class_id = t.class_id;
        ++m.count;
        m.rx_deg += t.rx_deg;
        m.ry_deg += t.ry_deg;
        m.tx_mm += t.tx_mm;
        m.ty_mm += t.ty_mm;
        m.tz_mm += t.tz_mm;
    }
    std::vector<ClassMean> out;
    for (auto& [id, m] : acc) {
        const double n = static_cast<double>(m.count);
        m.rx_deg /= n;
        m.ry_deg /= n;
        m.tx_mm /= n;
        m.ty_mm /= n;
        m.tz_mm /= n;
        out.push_back(m);
    }
    return out;
}

}  // namespace

ErrorReport evaluate_errors(std::span<const PoseRecord> estimates, std::span<const PoseRecord> ground_truth,
                            MatchBy match) {
    ErrorReport report;
    report.trials = 1;
    report.tubes = pair_errors(estimates, ground_truth, match);
    report.classes = class_means(report.tubes);
    return report;
}

ErrorReport evaluate_trials(std::span<const Trial> trials, MatchBy match) {
    ErrorReport report;
    report.trials = trials.size();
    for (const auto& t : trials) {
        auto errors = pair_errors(t.estimates, t.ground_truth, match);
        report.tubes.insert(report.tubes.end(), errors.begin(), errors.end());
    }
    report.classes = class_means(report.tubes);
    return report;
}

std::string format_error_table(const ErrorReport& report) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %6s %9s %9s %9s %9s %9s\n", "class", "n", "Rx(deg)", "Ry(deg)", "Tx(mm)",
                  "Ty(mm)", "Tz(mm)");
    out += line;
    for (const auto& c : report.classes) {
        std::snprintf(line, sizeof line, "%-12s %6zu %9.3f %9.3f %9.3f %9.3f %9.3f\n", c.class_id.c_str(), c.count,
                      c.rx_deg, c.ry_deg, c.tx_mm, c.ty_mm, c.tz_mm);
        out += line;
    }
    std::snprintf(line, sizeof line, "trials: %zu, tubes: %zu\n", report.trials, report.tubes.size());
    out += line;
    return out;
}

}  // namespace tubepose
