#ifndef WORMGAIT_LOCOMOTION_HPP
#define WORMGAIT_LOCOMOTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <fmt/format.h>

#include "wormgait/actuation.hpp"
#include "wormgait/errors.hpp"
#include "wormgait/grid.hpp"
#include "wormgait/model.hpp"

namespace wormgait {

/// Continuous state (x1, v1) of the rear mass plus the current anchoring
/// positions of both fin pairs.
struct HybridState {
    double x1 = 0.0;
    double v1 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double t = 0.0;
};

/// Kinematic robustness margin added to the switching threshold.
struct MarginSetting {
    double delta_m = 0.0;

    void validate() const
    {
        if (!(delta_m >= 0.0) || std::isnan(delta_m)) {
            throw ParameterError(fmt::format("robustness margin must be nonnegative (got {})", delta_m));
        }
    }
};

enum class Anchor : int { Rear = 1, Front = 2 };

struct SwitchEvent {
    double t = 0.0;
    Anchor anchor = Anchor::Rear;
    int direction = 0; // +1 when the anchor moves by +d, -1 for -d
};

/// Time-sampled hybrid trajectory. `x1_accel` holds the right-hand side of the
/// reduced dynamics evaluated at each stored (post-switch) sample.
struct SimTrace {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> v1;
    std::vector<double> v2;
    std::vector<double> a1;
    std::vector<double> a2;
    std::vector<double> body_length;
    std::vector<double> body_rate;
    std::vector<double> x1_accel;
    std::vector<double> cable_force;
    std::vector<SwitchEvent> switch_events;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
};

struct StateRate {
    double dx1 = 0.0;
    double dv1 = 0.0;
};

inline constexpr int kMaxSwitchesPerCall = 10;

namespace detail {
    inline StateRate reduced_rhs(double x1, double v1, double a1, double a2, RobotParams const& p,
        FinForceLaw const& fin, double L, double Ldot, double Lddot) noexcept
    {
        double const force = -2.0 * p.eta * v1 - fin(x1 - a1) - fin(x1 + L - a2) - p.eta * Ldot - p.m2 * Lddot;
        return { v1, force / (p.m1 + p.m2) };
    }
} // namespace detail

/// Right-hand side of the two-state dynamics obtained by eliminating the
/// front mass through x2 = x1 + L.
[[nodiscard]] inline StateRate reduced_dynamics(HybridState const& s, RobotParams const& p,
    double L, double Ldot, double Lddot) noexcept
{
    return detail::reduced_rhs(s.x1, s.v1, s.a1, s.a2, p, FinForceLaw(p), L, Ldot, Lddot);
}

/// Applies the (margin-shifted) anchor switching map until no condition
/// fires. Each switch is appended to `events` when given.
[[nodiscard]] inline HybridState apply_switching(HybridState s, double L, RobotParams const& p,
    MarginSetting margin, std::vector<SwitchEvent>* events = nullptr)
{
    double const threshold = p.p_sw + margin.delta_m;
    for (int fired = 0;; ++fired) {
        double const e1 = s.x1 - s.a1;
        double const e2 = s.x1 + L - s.a2;
        Anchor anchor {};
        int direction = 0;
        if (e1 > threshold) {
            anchor = Anchor::Rear;
            direction = 1;
        } else if (e1 < -threshold) {
            anchor = Anchor::Rear;
            direction = -1;
        } else if (e2 > threshold) {
            anchor = Anchor::Front;
            direction = 1;
        } else if (e2 < -threshold) {
            anchor = Anchor::Front;
            direction = -1;
        } else {
            return s;
        }
        if (fired == kMaxSwitchesPerCall) {
            throw LivelockError(fmt::format("anchor switching did not settle after {} switches at t={}", kMaxSwitchesPerCall, s.t));
        }
        (anchor == Anchor::Rear ? s.a1 : s.a2) += direction * p.d;
        if (events != nullptr) {
            events->push_back({ s.t, anchor, direction });
        }
    }
}

/// Fins centered in their grooves: zero offset at both anchors.
[[nodiscard]] inline HybridState centered_state(double x1, double body_length,
    double a1_offset = 0.0, double a2_offset = 0.0) noexcept
{
    return { x1, 0.0, x1 - a1_offset, x1 + body_length - a2_offset, 0.0 };
}

/// Cable force recovered from the rear-mass balance.
[[nodiscard]] inline std::vector<double> recover_cable_force(SimTrace const& trace, RobotParams const& p,
    BodyLengthTrace const& length)
{
    require_same_grid(trace.times, length.times);
    FinForceLaw const fin(p);
    std::vector<double> fc(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        fc[i] = p.m1 * trace.x1_accel[i] + p.k_b * (p.l_free - trace.body_length[i]) - p.c_b * length.dl_dt[i]
            + p.eta * trace.v1[i] + fin(trace.x1[i] - trace.a1[i]);
    }
    return fc;
}

/// Integrates the hybrid model with classical RK4 driven by a sampled body
/// length (L = l0 + delta_l). Forcing at the half step is interpolated
/// linearly; switching is applied after every step.
[[nodiscard]] inline SimTrace simulate_measured(BodyLengthTrace const& length, RobotParams const& p,
    MarginSetting margin, std::optional<HybridState> init = std::nullopt)
{
    p.validate();
    margin.validate();
    double const dt = uniform_step(length.times);
    std::size_t const n = length.size();
    if (length.delta_l.size() != n || length.dl_dt.size() != n || length.d2l_dt2.size() != n) {
        throw GridError("body-length trace arrays differ in length");
    }

    FinForceLaw const fin(p);
    SimTrace tr;
    tr.dt = dt;
    tr.times = length.times;
    tr.body_length.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tr.body_length[i] = p.l0 + length.delta_l[i];
    }
    tr.body_rate = length.dl_dt;
    for (auto* v : { &tr.x1, &tr.x2, &tr.v1, &tr.v2, &tr.a1, &tr.a2, &tr.x1_accel }) {
        v->resize(n);
    }

    HybridState s = init.value_or(centered_state(0.0, tr.body_length[0]));
    s.t = length.times[0];
    double const origin1 = s.a1;
    double const origin2 = s.a2;
    std::int64_t n_rear = 0;
    std::int64_t n_front = 0;

    auto const& L = tr.body_length;
    auto const& Ld = length.dl_dt;
    auto const& Ldd = length.d2l_dt2;
    auto record = [&](std::size_t i) {
        tr.x1[i] = s.x1;
        tr.v1[i] = s.v1;
        tr.a1[i] = s.a1;
        tr.a2[i] = s.a2;
        tr.x2[i] = s.x1 + L[i];
        tr.v2[i] = s.v1 + Ld[i];
        tr.x1_accel[i] = detail::reduced_rhs(s.x1, s.v1, s.a1, s.a2, p, fin, L[i], Ld[i], Ldd[i]).dv1;
    };
    record(0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        double const Lm = 0.5 * (L[i] + L[i + 1]);
        double const Ldm = 0.5 * (Ld[i] + Ld[i + 1]);
        double const Lddm = 0.5 * (Ldd[i] + Ldd[i + 1]);
        auto rhs = [&](double x, double v, double l, double ld, double ldd) {
            return detail::reduced_rhs(x, v, s.a1, s.a2, p, fin, l, ld, ldd);
        };
        auto const k1 = rhs(s.x1, s.v1, L[i], Ld[i], Ldd[i]);
        auto const k2 = rhs(s.x1 + 0.5 * dt * k1.dx1, s.v1 + 0.5 * dt * k1.dv1, Lm, Ldm, Lddm);
        auto const k3 = rhs(s.x1 + 0.5 * dt * k2.dx1, s.v1 + 0.5 * dt * k2.dv1, Lm, Ldm, Lddm);
        auto const k4 = rhs(s.x1 + dt * k3.dx1, s.v1 + dt * k3.dv1, L[i + 1], Ld[i + 1], Ldd[i + 1]);
        s.x1 += dt / 6.0 * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1);
        s.v1 += dt / 6.0 * (k1.dv1 + 2.0 * k2.dv1 + 2.0 * k3.dv1 + k4.dv1);
        s.t = length.times[i + 1];
        auto const before = tr.switch_events.size();
        s = apply_switching(s, L[i + 1], p, margin, &tr.switch_events);
        if (tr.switch_events.size() != before) {
            // keep anchors on the exact lattice origin + k d
            for (auto e = before; e < tr.switch_events.size(); ++e) {
                (tr.switch_events[e].anchor == Anchor::Rear ? n_rear : n_front) += tr.switch_events[e].direction;
            }
            s.a1 = origin1 + static_cast<double>(n_rear) * p.d;
            s.a2 = origin2 + static_cast<double>(n_front) * p.d;
        }
        record(i + 1);
    }

    tr.cable_force = recover_cable_force(tr, p, length);
    return tr;
}

/// Finest step accepted by `simulate` for a gait.
[[nodiscard]] inline double max_simulation_step(GaitParams const& gait, ActuationParams const& act) noexcept
{
    return std::min(act.tau, gait.period()) / 50.0;
}

/// Full forward pipeline: clipped command -> actuation -> hybrid locomotion.
[[nodiscard]] inline SimTrace simulate(GaitParams const& gait, RobotParams const& p, ActuationParams const& act,
    MarginSetting margin, int n_cycles = 5, double dt = 1e-3, std::optional<HybridState> init = std::nullopt,
    double dl0 = 0.0)
{
    gait.validate();
    act.validate();
    if (n_cycles < 1) {
        throw ParameterError(fmt::format("need at least one cycle (got {})", n_cycles));
    }
    if (!(dt > 0.0) || dt > max_simulation_step(gait, act) * (1.0 + 1e-12)) {
        throw ResolutionError(fmt::format("time step {} s too coarse: must be positive and at most min(tau, 1/f)/50 = {} s",
            dt, max_simulation_step(gait, act)));
    }
    auto const length = propagate_actuation(act, gait, n_cycles * gait.period(), dt, dl0);
    return simulate_measured(length, p, margin, init);
}

} // namespace wormgait

#endif
