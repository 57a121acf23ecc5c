#ifndef WORMGAIT_GRID_HPP
#define WORMGAIT_GRID_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "wormgait/errors.hpp"

namespace wormgait {

// Returns the step of a uniform time grid, or throws GridError.
inline double uniform_step(std::span<double const> times)
{
    if (times.size() < 2) {
        throw GridError(fmt::format("time grid needs at least two samples (got {})", times.size()));
    }
    double const dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) {
        throw GridError("time grid must be strictly increasing");
    }
    double const tol = 1e-6 * dt;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double const expected = times.front() + static_cast<double>(i) * dt;
        if (std::abs(times[i] - expected) > tol) {
            throw GridError(fmt::format("time grid is not uniform at sample {} (t={}, expected {})", i, times[i], expected));
        }
    }
    return dt;
}

inline void require_same_grid(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) {
        throw GridError(fmt::format("time grids differ in length ({} vs {})", a.size(), b.size()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) {
            throw GridError(fmt::format("time grids differ at sample {} ({} vs {})", i, a[i], b[i]));
        }
    }
}

// Cumulative trapezoidal integral on a uniform grid, starting at zero.
inline std::vector<double> cumulative_trapezoid(std::span<double const> y, double dt)
{
    std::vector<double> out(y.size(), 0.0);
    for (std::size_t i = 1; i < y.size(); ++i) {
        out[i] = out[i - 1] + 0.5 * dt * (y[i - 1] + y[i]);
    }
    return out;
}

} // namespace wormgait

#endif
