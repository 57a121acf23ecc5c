#ifndef WORMGAIT_NELDER_MEAD_HPP
#define WORMGAIT_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "wormgait/parallel.hpp"

namespace wormgait {

struct NelderMeadOptions {
    int max_iterations = 2000;
    double tolerance = 1e-6; // simplex diameter in the unit box
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x; // in the unit box
    double value = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> history; // best value after each iteration
    std::size_t start_index = 0;
};

/// Nelder-Mead simplex restricted to the unit box [0,1]^n; trial points are
/// clamped onto the box before evaluation.
template <typename F>
NelderMeadResult nelder_mead_unit_box(F&& objective, std::vector<double> start, NelderMeadOptions const& opt = {})
{
    std::size_t const n = start.size();
    auto clamp = [](std::vector<double> v) {
        for (auto& c : v) {
            c = std::clamp(c, 0.0, 1.0);
        }
        return v;
    };
    struct Vertex {
        std::vector<double> x;
        double f;
    };
    auto make = [&](std::vector<double> x) {
        x = clamp(std::move(x));
        double f = objective(x);
        if (std::isnan(f)) {
            f = std::numeric_limits<double>::infinity();
        }
        return Vertex { std::move(x), f };
    };

    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(make(start));
    for (std::size_t i = 0; i < n; ++i) {
        auto x = simplex.front().x;
        // step away from the nearer face so the simplex is not flattened by clamping
        x[i] += (x[i] + opt.initial_step <= 1.0) ? opt.initial_step : -opt.initial_step;
        simplex.push_back(make(std::move(x)));
    }

    auto order = [&] {
        std::stable_sort(simplex.begin(), simplex.end(), [](Vertex const& a, Vertex const& b) { return a.f < b.f; });
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                d = std::max(d, std::abs(simplex[i].x[j] - simplex[0].x[j]));
            }
        }
        return d;
    };
    auto affine = [&](std::vector<double> const& a, std::vector<double> const& b, double t) {
        std::vector<double> r(n);
        for (std::size_t j = 0; j < n; ++j) {
            r[j] = a[j] + t * (b[j] - a[j]);
        }
        return r;
    };

    NelderMeadResult res;
    order();
    while (res.iterations < opt.max_iterations) {
        if (diameter() < opt.tolerance) {
            res.converged = true;
            break;
        }
        ++res.iterations;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[i].x[j] / static_cast<double>(n);
            }
        }
        auto& worst = simplex[n];
        auto reflected = make(affine(centroid, worst.x, -1.0));
        if (reflected.f < simplex[0].f) {
            auto expanded = make(affine(centroid, worst.x, -2.0));
            worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
        } else if (reflected.f < simplex[n - 1].f) {
            worst = std::move(reflected);
        } else {
            bool const outside = reflected.f < worst.f;
            auto contracted = make(affine(centroid, outside ? reflected.x : worst.x, 0.5));
            if (contracted.f < std::min(reflected.f, worst.f)) {
                worst = std::move(contracted);
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    simplex[i] = make(affine(simplex[0].x, simplex[i].x, 0.5));
                }
            }
        }
        order();
        res.history.push_back(simplex[0].f);
    }
    if (!res.converged && diameter() < opt.tolerance) {
        res.converged = true;
    }
    res.x = simplex[0].x;
    res.value = simplex[0].f;
    return res;
}

/// Runs Nelder-Mead from the centers of a levels^n grid of cells over the
/// unit box and keeps the best result (lowest value, then lowest start index).
template <typename F>
NelderMeadResult multi_start_nelder_mead(F const& objective, std::size_t n, NelderMeadOptions const& opt = {},
    std::size_t levels = 3, unsigned jobs = 1)
{
    std::size_t starts = 1;
    for (std::size_t i = 0; i < n; ++i) {
        starts *= levels;
    }
    std::vector<NelderMeadResult> results(starts);
    parallel_for(starts, jobs, [&](std::size_t s) {
        std::vector<double> x0(n);
        std::size_t code = s;
        for (std::size_t j = 0; j < n; ++j) {
            x0[j] = (static_cast<double>(code % levels) + 0.5) / static_cast<double>(levels);
            code /= levels;
        }
        results[s] = nelder_mead_unit_box(objective, std::move(x0), opt);
        results[s].start_index = s;
    });
    auto best = std::min_element(results.begin(), results.end(), [](auto const& a, auto const& b) {
        return a.value < b.value;
    });
    return *best;
}

} // namespace wormgait

#endif
