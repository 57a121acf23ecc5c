#ifndef WORMGAIT_ENERGY_HPP
#define WORMGAIT_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "wormgait/errors.hpp"
#include "wormgait/grid.hpp"
#include "wormgait/locomotion.hpp"
#include "wormgait/model.hpp"

namespace wormgait {

struct EnergyParams {
    double p_idle = 0.82;  // idle baseline power (W)
    double alpha_p = 3.22; // lumped actuation power factor
    double g = kGravity;   // gravity used in the cost of transport (m/s^2)

    void validate() const
    {
        if (!(p_idle >= 0.0) || !std::isfinite(p_idle)) {
            throw ParameterError(fmt::format("idle power must be nonnegative (got {})", p_idle));
        }
        if (!(alpha_p >= 1.0) || !std::isfinite(alpha_p)) {
            throw ParameterError(fmt::format("actuation power factor must be at least 1 (got {})", alpha_p));
        }
        if (!(g > 0.0)) {
            throw ParameterError(fmt::format("gravity must be positive (got {})", g));
        }
    }
};

// Speeds at or below this are treated as no locomotion.
inline constexpr double kMinSpeed = 1e-9;
inline constexpr int kWindowCycles = 3;
inline constexpr int kTransientCycles = 2;

struct GaitMetrics {
    double v_avg = 0.0;  // average forward speed (m/s)
    double p_avg = 0.0;  // average power (W)
    double cot = std::numeric_limits<double>::infinity();               // P/(m g v)
    double energy_per_meter = std::numeric_limits<double>::infinity(); // P/v (J/m)
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t switches_in_window = 0;
};

[[nodiscard]] inline double instantaneous_power(double f_c, double l_dot, EnergyParams const& e) noexcept
{
    return e.p_idle + e.alpha_p * std::max(-f_c * l_dot, 0.0);
}

[[nodiscard]] inline std::vector<double> power_series(std::span<double const> f_c, std::span<double const> l_dot,
    EnergyParams const& e)
{
    if (f_c.size() != l_dot.size()) {
        throw GridError(fmt::format("force ({}) and rate ({}) series differ in length", f_c.size(), l_dot.size()));
    }
    std::vector<double> p(f_c.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = instantaneous_power(f_c[i], l_dot[i], e);
    }
    return p;
}

[[nodiscard]] inline std::vector<double> power_series(SimTrace const& trace, EnergyParams const& e)
{
    return power_series(trace.cable_force, trace.body_rate, e);
}

[[nodiscard]] inline std::vector<double> accumulate_energy(std::span<double const> power, double dt)
{
    if (!(dt > 0.0)) {
        throw GridError(fmt::format("energy integration needs a positive step (got {})", dt));
    }
    return cumulative_trapezoid(power, dt);
}

/// Metrics over the last three of the trace's whole cycles (at least five).
/// Without a switch in the window both anchors are fixed, so the body stays
/// inside its grooves and its long-run speed is zero; any residual drift is
/// transient settling and is not reported as locomotion.
[[nodiscard]] inline GaitMetrics gait_metrics(SimTrace const& trace, std::span<double const> power,
    GaitParams const& gait, RobotParams const& robot, double gravity = kGravity)
{
    if (power.size() != trace.size()) {
        throw GridError(fmt::format("power series ({}) does not match trace ({})", power.size(), trace.size()));
    }
    if (trace.size() < 2) {
        throw WindowError("trace too short for gait metrics");
    }
    double const period = gait.period();
    double const t0 = trace.times.front();
    double const span_t = trace.times.back() - t0;
    // the sampled horizon may end up to half a step short of a whole cycle
    double const cycles = std::floor((span_t + 0.5 * trace.dt) / period);
    if (cycles < kWindowCycles + kTransientCycles) {
        throw WindowError(fmt::format("trace spans {:.4g} cycles; at least {} are required", span_t / period,
            kWindowCycles + kTransientCycles));
    }
    double const dt = trace.dt;
    double const t_end = t0 + cycles * period;
    double const t_start = t_end - kWindowCycles * period;
    auto const i_end = static_cast<std::size_t>(std::llround((t_end - t0) / dt));
    auto const i_start = static_cast<std::size_t>(std::llround((t_start - t0) / dt));

    GaitMetrics m;
    m.t_start = trace.times[i_start];
    m.t_end = trace.times[std::min(i_end, trace.size() - 1)];
    std::size_t const last = std::min(i_end, trace.size() - 1);

    m.switches_in_window = static_cast<std::size_t>(std::count_if(trace.switch_events.begin(), trace.switch_events.end(),
        [&](SwitchEvent const& ev) { return ev.t > m.t_start && ev.t <= m.t_end; }));

    double const duration = m.t_end - m.t_start;
    m.v_avg = m.switches_in_window == 0 ? 0.0 : kTravelDirection * (trace.x1[last] - trace.x1[i_start]) / duration;

    double energy = 0.0;
    for (std::size_t i = i_start; i < last; ++i) {
        energy += 0.5 * dt * (power[i] + power[i + 1]);
    }
    m.p_avg = energy / duration;

    if (m.v_avg > kMinSpeed) {
        m.energy_per_meter = m.p_avg / m.v_avg;
        m.cot = m.energy_per_meter / (robot.total_mass() * gravity);
    }
    return m;
}

/// Idle power: mean of the first ten measured samples.
[[nodiscard]] inline double estimate_idle_power(std::span<double const> samples)
{
    constexpr std::size_t kIdleSamples = 10;
    if (samples.size() < kIdleSamples) {
        throw DataError(fmt::format("idle power needs at least {} samples (got {})", kIdleSamples, samples.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < kIdleSamples; ++i) {
        sum += samples[i];
    }
    return sum / static_cast<double>(kIdleSamples);
}

} // namespace wormgait

#endif
