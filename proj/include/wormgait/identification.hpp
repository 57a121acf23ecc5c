#ifndef WORMGAIT_IDENTIFICATION_HPP
#define WORMGAIT_IDENTIFICATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "wormgait/actuation.hpp"
#include "wormgait/energy.hpp"
#include "wormgait/errors.hpp"
#include "wormgait/grid.hpp"
#include "wormgait/locomotion.hpp"
#include "wormgait/model.hpp"
#include "wormgait/nelder_mead.hpp"

namespace wormgait {

/// Motion-tracking record: rear-mass position and realized body length.
struct TrackingLog {
    std::vector<double> times;
    std::vector<double> x1;
    std::vector<double> length;

    static constexpr std::size_t kMinSamples = 100;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }

    double validate() const
    {
        if (x1.size() != times.size() || length.size() != times.size()) {
            throw GridError("tracking log columns differ in length");
        }
        if (times.size() < kMinSamples) {
            throw DataError(fmt::format("tracking log needs at least {} samples (got {})", kMinSamples, times.size()));
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(x1[i]) || !std::isfinite(length[i])) {
                throw DataError(fmt::format("tracking log has a non-finite sample at row {}", i));
            }
        }
        return uniform_step(times);
    }
};

/// Source-side electrical power record.
struct PowerLog {
    std::vector<double> times;
    std::vector<double> power;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }

    double validate() const
    {
        if (power.size() != times.size()) {
            throw GridError("power log columns differ in length");
        }
        if (times.size() < 10) {
            throw DataError(fmt::format("power log needs at least 10 samples (got {})", times.size()));
        }
        for (double p : power) {
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw DataError("power samples must be finite and nonnegative");
            }
        }
        return uniform_step(times);
    }
};

struct ParameterRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct FitResidual {
    std::size_t run = 0;
    double t = 0.0;
    double measured = 0.0;
    double predicted = 0.0;
};

struct FitReport {
    std::vector<std::string> names;
    std::vector<double> values;
    double cost = std::numeric_limits<double>::infinity();
    double residual_rms = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> cost_history;
    std::vector<std::pair<std::string, double>> extras;
    std::vector<std::string> warnings;
    std::vector<FitResidual> residuals;

    [[nodiscard]] double value(std::string_view name) const
    {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) {
                return values[i];
            }
        }
        throw std::out_of_range(fmt::format("fit has no parameter '{}'", name));
    }
};

struct FitOptions {
    NelderMeadOptions nelder_mead {};
    std::size_t levels = 3; // multi-start grid levels per parameter
    unsigned jobs = 1;
};

/// Initial-condition and preprocessing settings shared by the fits that drive
/// the locomotion model with measured body length.
struct MeasuredDriveSettings {
    std::size_t smoothing_window = 5;
    double a1_offset = 0.0;
    double a2_offset = 0.0;
};

namespace detail {
    inline double mean_square(std::span<double const> a, std::span<double const> b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double const r = a[i] - b[i];
            s += r * r;
        }
        return s / static_cast<double>(a.size());
    }

    // Mean square of a - b - c for the best constant c. The initial position
    // (or length) of a run is unknown up to sensor noise and the models are
    // invariant under shifting it, so it is profiled out this way.
    inline double offset_free_mean_square(std::span<double const> a, std::span<double const> b, double* offset = nullptr)
    {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            mean += a[i] - b[i];
        }
        mean /= static_cast<double>(a.size());
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            double const r = a[i] - b[i] - mean;
            s += r * r;
        }
        if (offset != nullptr) {
            *offset = mean;
        }
        return s / static_cast<double>(a.size());
    }

    inline std::vector<double> to_physical(std::span<double const> unit, std::span<ParameterRange const> box)
    {
        std::vector<double> x(unit.size());
        for (std::size_t i = 0; i < unit.size(); ++i) {
            x[i] = box[i].lo + unit[i] * (box[i].hi - box[i].lo);
        }
        return x;
    }

    inline void check_box(std::span<ParameterRange const> box)
    {
        for (auto const& r : box) {
            if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
                throw ParameterError(fmt::format("invalid parameter range [{}, {}]", r.lo, r.hi));
            }
        }
    }

    inline void flag_bound_hits(FitReport& rep, std::span<double const> unit, std::span<std::string const> names)
    {
        for (std::size_t i = 0; i < unit.size(); ++i) {
            if (unit[i] <= 1e-4 || unit[i] >= 1.0 - 1e-4) {
                rep.warnings.push_back(fmt::format("{} converged onto its bound", names[i]));
            }
        }
    }

    inline void finish_report(FitReport& rep)
    {
        double sum = 0.0;
        for (auto const& r : rep.residuals) {
            sum += (r.measured - r.predicted) * (r.measured - r.predicted);
        }
        rep.residual_rms = rep.residuals.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(rep.residuals.size()));
    }

    inline void require_runs(std::size_t n)
    {
        if (n == 0) {
            throw DataError("identification needs at least one run");
        }
    }
} // namespace detail

/// Cuts a log at the first sample where the rear mass has advanced `ridges`
/// pitches along the travel direction. Returns the log unchanged when that
/// never happens.
[[nodiscard]] inline TrackingLog truncate_to_ridges(TrackingLog const& log, double pitch, int ridges = 5)
{
    double const target = ridges * pitch;
    for (std::size_t i = 0; i < log.size(); ++i) {
        if (kTravelDirection * (log.x1[i] - log.x1.front()) >= target) {
            TrackingLog out;
            out.times.assign(log.times.begin(), log.times.begin() + static_cast<std::ptrdiff_t>(i + 1));
            out.x1.assign(log.x1.begin(), log.x1.begin() + static_cast<std::ptrdiff_t>(i + 1));
            out.length.assign(log.length.begin(), log.length.begin() + static_cast<std::ptrdiff_t>(i + 1));
            return out;
        }
    }
    return log;
}

// --- locomotion: (eta, p_sw) from x1 tracking -------------------------------

namespace detail {
    struct PreparedTracking {
        TrackingLog const* log;
        BodyLengthTrace length;
        double l0;
    };

    inline std::vector<PreparedTracking> prepare_tracking(std::span<TrackingLog const> logs, std::size_t window)
    {
        std::vector<PreparedTracking> out;
        out.reserve(logs.size());
        for (auto const& log : logs) {
            log.validate();
            auto [lo, hi] = std::minmax_element(log.length.begin(), log.length.end());
            if (*hi - *lo <= 1e-9) {
                throw DataError("tracking log has no body-length variation; the locomotion parameters are unidentifiable");
            }
            std::vector<double> dl(log.size());
            for (std::size_t i = 0; i < dl.size(); ++i) {
                dl[i] = log.length[i] - log.length.front();
            }
            out.push_back({ &log, measured_length_trace(log.times, dl, window), log.length.front() });
        }
        return out;
    }

    inline SimTrace predict_tracking(PreparedTracking const& run, RobotParams robot, MeasuredDriveSettings const& s)
    {
        robot.l0 = run.l0;
        auto init = centered_state(run.log->x1.front(), run.l0, s.a1_offset, s.a2_offset);
        return simulate_measured(run.length, robot, MarginSetting {}, init);
    }

    inline double locomotion_cost_prepared(std::span<PreparedTracking const> runs, RobotParams const& robot,
        MeasuredDriveSettings const& s)
    {
        double total = 0.0;
        for (auto const& run : runs) {
            auto const tr = predict_tracking(run, robot, s);
            total += offset_free_mean_square(run.log->x1, tr.x1);
        }
        return total / static_cast<double>(runs.size());
    }
} // namespace detail

/// Locomotion objective: mean over runs of the mean squared x1 error, with the
/// hybrid model driven by each run's measured body length and the initial
/// position profiled out.
[[nodiscard]] inline double locomotion_cost(std::span<TrackingLog const> logs, RobotParams const& robot,
    MeasuredDriveSettings const& settings = {})
{
    detail::require_runs(logs.size());
    auto const runs = detail::prepare_tracking(logs, settings.smoothing_window);
    return detail::locomotion_cost_prepared(runs, robot, settings);
}

[[nodiscard]] inline std::vector<ParameterRange> default_locomotion_box(RobotParams const& known)
{
    return { { 1.0, 1000.0 }, { known.delta_c / 2.0 * (1.0 + 1e-6), 2.0 * known.d } };
}

/// Fits the viscous coefficient and switching threshold (eta, p_sw); all
/// other robot parameters are taken from `known`.
[[nodiscard]] inline FitReport fit_locomotion(std::span<TrackingLog const> logs, RobotParams const& known,
    std::optional<std::vector<ParameterRange>> box = std::nullopt, FitOptions const& opt = {},
    MeasuredDriveSettings const& settings = {})
{
    detail::require_runs(logs.size());
    auto const ranges = box.value_or(default_locomotion_box(known));
    if (ranges.size() != 2) {
        throw ParameterError("locomotion fit expects two parameter ranges (eta, p_sw)");
    }
    detail::check_box(ranges);
    auto const runs = detail::prepare_tracking(logs, settings.smoothing_window);

    auto candidate = [&](std::span<double const> unit) {
        auto const x = detail::to_physical(unit, ranges);
        RobotParams r = known;
        r.eta = x[0];
        r.p_sw = x[1];
        return r;
    };
    auto objective = [&](std::vector<double> const& unit) {
        try {
            return detail::locomotion_cost_prepared(runs, candidate(unit), settings);
        } catch (LivelockError const&) {
            // thresholds below half a pitch can bounce between grooves
            return std::numeric_limits<double>::infinity();
        }
    };
    auto const best = multi_start_nelder_mead(objective, 2, opt.nelder_mead, opt.levels, opt.jobs);

    FitReport rep;
    rep.names = { "eta", "p_sw" };
    rep.values = detail::to_physical(best.x, ranges);
    rep.cost = best.value;
    rep.iterations = best.iterations;
    rep.converged = best.converged;
    rep.cost_history = best.history;
    detail::flag_bound_hits(rep, best.x, rep.names);
    auto const fitted = candidate(best.x);
    for (std::size_t k = 0; k < runs.size(); ++k) {
        auto const tr = detail::predict_tracking(runs[k], fitted, settings);
        double offset = 0.0;
        (void)detail::offset_free_mean_square(runs[k].log->x1, tr.x1, &offset);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            rep.residuals.push_back({ k, tr.times[i], runs[k].log->x1[i], tr.x1[i] + offset });
        }
    }
    detail::finish_report(rep);
    return rep;
}

// --- actuation: (delta_s, K, tau) from body-length change -------------------

struct ActuationRun {
    TrackingLog log;
    GaitParams gait;
};

namespace detail {
    // The commanded samples depend only on the gait, so they are computed once.
    struct PreparedActuation {
        double dt = 0.0;
        std::vector<double> u_cmd;
        std::vector<double> measured; // L - L[0]
    };

    inline PreparedActuation prepare_actuation_run(ActuationRun const& run)
    {
        PreparedActuation out;
        out.dt = run.log.validate();
        run.gait.validate();
        for (std::size_t i = 0; i < run.log.size(); ++i) {
            out.u_cmd.push_back(commanded_gait(run.gait, run.log.times[i] - run.log.times.front()));
            out.measured.push_back(run.log.length[i] - run.log.length.front());
        }
        return out;
    }

    inline std::vector<PreparedActuation> prepare_actuation(std::span<ActuationRun const> runs)
    {
        require_runs(runs.size());
        std::vector<PreparedActuation> out;
        for (auto const& run : runs) {
            out.push_back(prepare_actuation_run(run));
        }
        return out;
    }

    // Same samples as propagate_actuation from dL = 0 on the log's grid.
    inline std::vector<double> predict_length_change(PreparedActuation const& run, ActuationParams const& act)
    {
        std::vector<double> u(run.u_cmd.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            u[i] = slack_clip(run.u_cmd[i], act.delta_s);
        }
        return first_order_response(act, u, run.dt);
    }

    inline double actuation_cost_prepared(std::span<PreparedActuation const> runs, ActuationParams const& act)
    {
        double total = 0.0;
        for (auto const& run : runs) {
            total += offset_free_mean_square(run.measured, predict_length_change(run, act));
        }
        return total / static_cast<double>(runs.size());
    }
} // namespace detail

/// Actuation objective: mean over runs of the mean squared body-length-change
/// error, with dL_meas = L - L[0] and the initial length profiled out.
[[nodiscard]] inline double actuation_cost(std::span<ActuationRun const> runs, ActuationParams const& act)
{
    act.validate();
    return detail::actuation_cost_prepared(detail::prepare_actuation(runs), act);
}

[[nodiscard]] inline std::vector<ParameterRange> default_actuation_box(double dt)
{
    return { { 1e-4, 0.05 }, { 0.3, 1.5 }, { std::max(0.01, 10.0 * dt), 1.0 } };
}

/// Fits (delta_s, K, tau). When the fitted slack width is at least every
/// run's stroke the clip never releases, only K*delta_s is observable, and the
/// fit is reported as not converged.
[[nodiscard]] inline FitReport fit_actuation(std::span<ActuationRun const> runs,
    std::optional<std::vector<ParameterRange>> box = std::nullopt, FitOptions const& opt = {})
{
    auto const prepared = detail::prepare_actuation(runs);
    double const dt = prepared.front().dt;
    for (auto const& run : prepared) {
        auto [lo, hi] = std::minmax_element(run.measured.begin(), run.measured.end());
        if (*hi - *lo <= 1e-9) {
            throw DataError("tracking log has no body-length variation; the actuation parameters are unidentifiable");
        }
        if (std::abs(run.dt - dt) > 1e-9 * dt) {
            throw GridError("actuation runs must share one sampling step");
        }
    }
    auto const ranges = box.value_or(default_actuation_box(dt));
    if (ranges.size() != 3) {
        throw ParameterError("actuation fit expects three parameter ranges (delta_s, K, tau)");
    }
    detail::check_box(ranges);
    if (ranges[2].lo < 10.0 * dt) {
        throw ResolutionError(fmt::format("tau lower bound {} is below 10 sampling steps ({})", ranges[2].lo, 10.0 * dt));
    }

    auto candidate = [&](std::span<double const> unit) {
        auto const x = detail::to_physical(unit, ranges);
        return ActuationParams { x[0], x[1], x[2] };
    };
    auto objective = [&](std::vector<double> const& unit) {
        return detail::actuation_cost_prepared(prepared, candidate(unit));
    };
    auto const best = multi_start_nelder_mead(objective, 3, opt.nelder_mead, opt.levels, opt.jobs);

    FitReport rep;
    rep.names = { "delta_s", "gain_k", "tau" };
    rep.values = detail::to_physical(best.x, ranges);
    rep.cost = best.value;
    rep.iterations = best.iterations;
    rep.converged = best.converged;
    rep.cost_history = best.history;
    detail::flag_bound_hits(rep, best.x, rep.names);

    auto const fitted = candidate(best.x);
    double max_stroke = 0.0;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        max_stroke = std::max(max_stroke, runs[k].gait.stroke_s);
        auto const pred = detail::predict_length_change(prepared[k], fitted);
        auto const& meas = prepared[k].measured;
        double offset = 0.0;
        (void)detail::offset_free_mean_square(meas, pred, &offset);
        for (std::size_t i = 0; i < meas.size(); ++i) {
            rep.residuals.push_back({ k, runs[k].log.times[i], meas[i], pred[i] + offset });
        }
    }
    if (fitted.delta_s >= max_stroke) {
        rep.converged = false;
        rep.warnings.push_back(fmt::format(
            "slack width unidentifiable: the clip stays active over the whole cycle (delta_s={} >= S={})",
            fitted.delta_s, max_stroke));
    }
    detail::finish_report(rep);
    return rep;
}

// --- energy: (c_b, alpha_P) from accumulated energy -------------------------

struct EnergyRun {
    PowerLog power;
    TrackingLog tracking;
};

namespace detail {
    // Per-run quantities that do not depend on (c_b, alpha_P). The cable force
    // is affine in c_b: F_c = base_force - c_b * L'.
    struct PreparedEnergyRun {
        std::vector<double> times;
        double dt = 0.0;
        double p_idle = 0.0;
        std::vector<double> measured_energy;
        std::vector<double> base_force;
        std::vector<double> rate;
    };

    inline PreparedEnergyRun prepare_energy_run(EnergyRun const& run, RobotParams const& robot,
        MeasuredDriveSettings const& s)
    {
        double const dt = run.power.validate();
        run.tracking.validate();
        require_same_grid(run.power.times, run.tracking.times);

        std::vector<TrackingLog> one { run.tracking };
        auto const prepared = prepare_tracking(one, s.smoothing_window);
        auto const tr = predict_tracking(prepared.front(), robot, s);

        RobotParams no_damping = robot;
        no_damping.c_b = 0.0;
        no_damping.l0 = prepared.front().l0;

        PreparedEnergyRun out;
        out.times = run.power.times;
        out.dt = dt;
        out.p_idle = estimate_idle_power(run.power.power);
        out.measured_energy = accumulate_energy(run.power.power, dt);
        out.base_force = recover_cable_force(tr, no_damping, prepared.front().length);
        out.rate = prepared.front().length.dl_dt;
        return out;
    }

    inline std::vector<double> predicted_energy(PreparedEnergyRun const& run, double c_b, double alpha_p)
    {
        std::vector<double> p(run.rate.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            double const fc = run.base_force[i] - c_b * run.rate[i];
            p[i] = run.p_idle + alpha_p * std::max(-fc * run.rate[i], 0.0);
        }
        return accumulate_energy(p, run.dt);
    }

    inline double energy_cost_prepared(std::span<PreparedEnergyRun const> runs, double c_b, double alpha_p)
    {
        double total = 0.0;
        for (auto const& run : runs) {
            total += mean_square(run.measured_energy, predicted_energy(run, c_b, alpha_p));
        }
        return total / static_cast<double>(runs.size());
    }

    inline std::vector<PreparedEnergyRun> prepare_energy(std::span<EnergyRun const> runs, RobotParams const& robot,
        MeasuredDriveSettings const& s)
    {
        require_runs(runs.size());
        std::vector<PreparedEnergyRun> out;
        out.reserve(runs.size());
        for (auto const& r : runs) {
            out.push_back(prepare_energy_run(r, robot, s));
        }
        return out;
    }
} // namespace detail

/// Energy objective: mean over runs of the mean squared accumulated-energy
/// error. Idle power is estimated per run from its first ten samples.
[[nodiscard]] inline double energy_cost(std::span<EnergyRun const> runs, RobotParams const& robot, double alpha_p,
    MeasuredDriveSettings const& settings = {})
{
    auto const prepared = detail::prepare_energy(runs, robot, settings);
    return detail::energy_cost_prepared(prepared, robot.c_b, alpha_p);
}

[[nodiscard]] inline std::vector<ParameterRange> default_energy_box()
{
    return { { 1.0, 5000.0 }, { 1.0, 20.0 } };
}

/// Fits (c_b, alpha_P) with the locomotion parameters of `known` fixed. With
/// `fixed_c_b` only alpha_P is searched.
[[nodiscard]] inline FitReport fit_energy(std::span<EnergyRun const> runs, RobotParams const& known,
    std::optional<std::vector<ParameterRange>> box = std::nullopt, FitOptions const& opt = {},
    MeasuredDriveSettings const& settings = {}, std::optional<double> fixed_c_b = std::nullopt)
{
    auto const prepared = detail::prepare_energy(runs, known, settings);
    auto const ranges = box.value_or(default_energy_box());
    if (ranges.size() != 2) {
        throw ParameterError("energy fit expects two parameter ranges (c_b, alpha_p)");
    }
    detail::check_box(ranges);

    auto params_of = [&](std::span<double const> unit) -> std::pair<double, double> {
        if (fixed_c_b) {
            return { *fixed_c_b, ranges[1].lo + unit[0] * (ranges[1].hi - ranges[1].lo) };
        }
        auto const x = detail::to_physical(unit, ranges);
        return { x[0], x[1] };
    };
    auto objective = [&](std::vector<double> const& unit) {
        auto const [c_b, alpha] = params_of(unit);
        return detail::energy_cost_prepared(prepared, c_b, alpha);
    };
    std::size_t const dims = fixed_c_b ? 1 : 2;
    auto const best = multi_start_nelder_mead(objective, dims, opt.nelder_mead, opt.levels, opt.jobs);

    auto const [c_b, alpha] = params_of(best.x);
    FitReport rep;
    rep.names = { "c_b", "alpha_p" };
    rep.values = { c_b, alpha };
    rep.cost = best.value;
    rep.iterations = best.iterations;
    rep.converged = best.converged;
    rep.cost_history = best.history;
    detail::flag_bound_hits(rep, best.x, std::span(rep.names).last(dims));
    double idle = 0.0;
    for (std::size_t k = 0; k < prepared.size(); ++k) {
        idle += prepared[k].p_idle / static_cast<double>(prepared.size());
        auto const pred = detail::predicted_energy(prepared[k], c_b, alpha);
        for (std::size_t i = 0; i < pred.size(); ++i) {
            rep.residuals.push_back({ k, prepared[k].times[i], prepared[k].measured_energy[i], pred[i] });
        }
    }
    rep.extras.emplace_back("p_idle", idle);
    detail::finish_report(rep);
    return rep;
}

} // namespace wormgait

#endif
