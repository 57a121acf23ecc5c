#ifndef WORMGAIT_ACTUATION_HPP
#define WORMGAIT_ACTUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "wormgait/errors.hpp"
#include "wormgait/grid.hpp"
#include "wormgait/model.hpp"

namespace wormgait {

/// Slack-aware first-order actuation: tau dL' + dL = K min(u_cmd, -delta_s).
struct ActuationParams {
    double delta_s = 0.008; // slack width (m)
    double gain_k = 0.860;  // steady-state transmission gain
    double tau = 0.155;     // time constant (s)

    void validate() const
    {
        if (!(delta_s > 0.0) || !(gain_k > 0.0) || !(tau > 0.0)
            || !std::isfinite(delta_s) || !std::isfinite(gain_k) || !std::isfinite(tau)) {
            throw ParameterError(fmt::format("actuation parameters must be positive (delta_s={}, gain_k={}, tau={})", delta_s, gain_k, tau));
        }
        if (gain_k > 1.5) {
            throw ParameterError(fmt::format("actuation gain {} exceeds the sanity bound 1.5", gain_k));
        }
    }
};

/// Realized body-length change sampled on a uniform grid, with its first two
/// time derivatives.
struct BodyLengthTrace {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> delta_l;
    std::vector<double> dl_dt;
    std::vector<double> d2l_dt2;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

[[nodiscard]] inline double slack_clip(double u_cmd, double delta_s) noexcept
{
    return std::min(u_cmd, -delta_s);
}

namespace detail {
    // Effective-input slope on the branch active just after t.
    inline double effective_rate(double u_cmd, double u_cmd_rate, double delta_s) noexcept
    {
        if (u_cmd < -delta_s) {
            return u_cmd_rate;
        }
        if (u_cmd > -delta_s) {
            return 0.0;
        }
        return u_cmd_rate < 0.0 ? u_cmd_rate : 0.0;
    }
} // namespace detail

/// Response of tau y' + y = K u to an input sampled every `dt` and linear
/// between samples, starting from y0. Exact up to rounding.
[[nodiscard]] inline std::vector<double> first_order_response(ActuationParams const& act,
    std::span<double const> u, double dt, double y0 = 0.0)
{
    if (!(dt > 0.0)) {
        throw ResolutionError(fmt::format("time step must be positive (got {})", dt));
    }
    std::vector<double> y(u.size());
    if (u.empty()) {
        return y;
    }
    double const k = act.gain_k;
    double const decay = std::exp(-dt / act.tau);
    y[0] = y0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        double const forced = k * (u[i + 1] - u[i]) / dt * act.tau;
        y[i + 1] = k * u[i + 1] - forced + (y[i] - k * u[i] + forced) * decay;
    }
    return y;
}

/// Propagates the first-order actuation dynamics driven by the slack-clipped
/// sinusoidal command. Uses the exact exponential update for an input that is
/// linear between samples.
[[nodiscard]] inline BodyLengthTrace propagate_actuation(ActuationParams const& act, GaitParams const& gait,
    double t_end, double dt, double dl0 = 0.0, bool clip = true)
{
    act.validate();
    gait.validate();
    if (!(dt > 0.0)) {
        throw ResolutionError(fmt::format("time step must be positive (got {})", dt));
    }
    if (dt > act.tau / 10.0) {
        throw ResolutionError(fmt::format("time step {} s exceeds tau/10 = {} s", dt, act.tau / 10.0));
    }
    if (!(t_end >= dt)) {
        throw ResolutionError(fmt::format("horizon {} s shorter than one step {} s", t_end, dt));
    }

    auto const n = static_cast<std::size_t>(std::llround(t_end / dt));
    BodyLengthTrace out;
    out.dt = dt;
    out.times.resize(n + 1);
    out.delta_l.resize(n + 1);
    out.dl_dt.resize(n + 1);
    out.d2l_dt2.resize(n + 1);

    double const k = act.gain_k;
    double const tau = act.tau;
    double const clip_level = clip ? act.delta_s : -1.0e300;

    std::vector<double> u_eff(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out.times[i] = static_cast<double>(i) * dt;
        u_eff[i] = slack_clip(commanded_gait(gait, out.times[i]), clip_level);
    }

    out.delta_l = first_order_response(act, u_eff, dt, dl0);

    for (std::size_t i = 0; i <= n; ++i) {
        double const t = out.times[i];
        out.dl_dt[i] = (k * u_eff[i] - out.delta_l[i]) / tau;
        double const u_rate = detail::effective_rate(commanded_gait(gait, t), commanded_gait_rate(gait, t), clip_level);
        out.d2l_dt2[i] = (k * u_rate - out.dl_dt[i]) / tau;
    }
    return out;
}

/// Builds a length trace from measured samples: centered moving average of
/// odd width `window` (shrunk symmetrically at the ends), then second-order
/// finite differences.
[[nodiscard]] inline BodyLengthTrace measured_length_trace(std::span<double const> times,
    std::span<double const> delta_l, std::size_t window = 5)
{
    if (times.size() != delta_l.size()) {
        throw GridError(fmt::format("length samples ({}) do not match time samples ({})", delta_l.size(), times.size()));
    }
    if (window == 0 || window % 2 == 0) {
        throw ParameterError(fmt::format("smoothing window must be odd and positive (got {})", window));
    }
    double const dt = uniform_step(times);
    std::size_t const n = times.size();
    if (n < 3) {
        throw DataError("need at least three length samples to differentiate");
    }

    BodyLengthTrace out;
    out.dt = dt;
    out.times.assign(times.begin(), times.end());
    out.delta_l.resize(n);
    out.dl_dt.resize(n);
    out.d2l_dt2.resize(n);

    std::size_t const half = window / 2;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t const h = std::min({ half, i, n - 1 - i });
        double sum = 0.0;
        for (std::size_t j = i - h; j <= i + h; ++j) {
            sum += delta_l[j];
        }
        out.delta_l[i] = sum / static_cast<double>(2 * h + 1);
    }

    auto const& y = out.delta_l;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out.dl_dt[i] = (y[i + 1] - y[i - 1]) / (2.0 * dt);
        out.d2l_dt2[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (dt * dt);
    }
    out.dl_dt[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
    out.dl_dt[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt);
    out.d2l_dt2[0] = out.d2l_dt2[1];
    out.d2l_dt2[n - 1] = out.d2l_dt2[n - 2];
    return out;
}

} // namespace wormgait

#endif
