#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>

namespace tubepose {

struct SimplexResult {
    Eigen::Vector2d x;
    double value = 0.0;
    int evaluations = 0;
};

/// Derivative-free minimization in two variables. Stops when the simplex
/// diameter falls below xtol or after max_evaluations. Deterministic.
inline SimplexResult nelder_mead_2d(const std::function<double(const Eigen::Vector2d&)>& f, const Eigen::Vector2d& x0,
                                    double initial_step, double xtol, int max_evaluations) {
    struct Vertex {
        Eigen::Vector2d x;
        double f;
    };
    int evals = 0;
    auto eval = [&](const Eigen::Vector2d& x) {
        ++evals;
        return Vertex{x, f(x)};
    };

    std::array<Vertex, 3> s = {eval(x0), eval(x0 + Eigen::Vector2d(initial_step, 0.0)),
                               eval(x0 + Eigen::Vector2d(0.0, initial_step))};
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };

    while (evals < max_evaluations) {
        std::stable_sort(s.begin(), s.end(), by_value);
        const double diameter = std::max((s[1].x - s[0].x).norm(), (s[2].x - s[0].x).norm());
        if (diameter < xtol) break;

        const Eigen::Vector2d mid = 0.5 * (s[0].x + s[1].x);
        const Vertex reflected = eval(mid + (mid - s[2].x));
        if (reflected.f < s[0].f) {
            const Vertex expanded = eval(mid + 2.0 * (mid - s[2].x));
            s[2] = expanded.f < reflected.f ? expanded : reflected;
        } else if (reflected.f < s[1].f) {
            s[2] = reflected;
        } else {
            const bool outside = reflected.f < s[2].f;
            const Vertex contracted =
                outside ? eval(mid + 0.5 * (reflected.x - mid)) : eval(mid + 0.5 * (s[2].x - mid));
            if (contracted.f < std::min(reflected.f, s[2].f)) {
                s[2] = contracted;
            } else {
                for (std::size_t i = 1; i < 3; ++i) s[i] = eval(s[0].x + 0.5 * (s[i].x - s[0].x));
            }
        }
    }
    std::stable_sort(s.begin(), s.end(), by_value);
    return {s[0].x, s[0].f, evals};
}

}  // namespace tubepose
