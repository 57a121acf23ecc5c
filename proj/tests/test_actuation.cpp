#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include <wormgait/actuation.hpp>

using namespace wormgait;

namespace {

// Plain RK4 on tau y' + y = K min(u_cmd(t), -delta_s), fine step.
std::vector<double> rk4_reference(ActuationParams const& a, GaitParams const& g, double t_end, double dt,
    int substeps, double y0 = 0.0)
{
    auto rhs = [&](double t, double y) { return (a.gain_k * std::min(commanded_gait(g, t), -a.delta_s) - y) / a.tau; };
    double const h = dt / substeps;
    auto const n = static_cast<std::size_t>(std::llround(t_end / dt));
    std::vector<double> out { y0 };
    double y = y0;
    double t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < substeps; ++k) {
            double const k1 = rhs(t, y);
            double const k2 = rhs(t + h / 2, y + h / 2 * k1);
            double const k3 = rhs(t + h / 2, y + h / 2 * k2);
            double const k4 = rhs(t + h, y + h * k3);
            y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            t += h;
        }
        out.push_back(y);
    }
    return out;
}

} // namespace

TEST(SlackClip, ClipsAboveThreshold)
{
    EXPECT_EQ(slack_clip(0.0, 0.008), -0.008);
    EXPECT_EQ(slack_clip(-0.005, 0.008), -0.008);
    EXPECT_EQ(slack_clip(-0.05, 0.008), -0.05);
}

TEST(FirstOrderResponse, StepMatchesAnalytic)
{
    ActuationParams const a;
    double const dt = 1e-4;
    std::vector<double> u(3101, -0.05);
    auto const y = first_order_response(a, u, dt);
    EXPECT_NEAR(y[1550], -0.02718, 1e-4);
    for (std::size_t i = 0; i < y.size(); i += 100) {
        double const t = static_cast<double>(i) * dt;
        EXPECT_NEAR(y[i], -0.043 * (1.0 - std::exp(-t / a.tau)), 1e-12);
    }
}

TEST(FirstOrderResponse, SettlesToGainTimesInput)
{
    ActuationParams const a;
    std::vector<double> u(20000, -0.05);
    auto const y = first_order_response(a, u, 1e-3);
    EXPECT_NEAR(y.back(), -0.043, 1e-12);
}

TEST(FirstOrderResponse, RampIsExact)
{
    ActuationParams const a;
    double const dt = 1e-2;
    double const s = -0.1;
    std::vector<double> u;
    for (int i = 0; i <= 100; ++i) {
        u.push_back(s * i * dt);
    }
    auto const y = first_order_response(a, u, dt);
    for (std::size_t i = 0; i < y.size(); ++i) {
        double const t = static_cast<double>(i) * dt;
        double const exact = a.gain_k * s * (t - a.tau + a.tau * std::exp(-t / a.tau));
        EXPECT_NEAR(y[i], exact, 1e-14);
    }
}

TEST(PropagateActuation, MatchesFineRungeKutta)
{
    ActuationParams const a;
    for (GaitParams const g : { GaitParams { 0.07, 0.2 }, GaitParams { 0.03, 0.4 }, GaitParams { 0.09, 0.08 } }) {
        double const t_end = 2.0 * g.period();
        auto const tr = propagate_actuation(a, g, t_end, 1e-3);
        auto const ref = rk4_reference(a, g, t_end, 1e-3, 20);
        ASSERT_EQ(tr.size(), ref.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            worst = std::max(worst, std::abs(tr.delta_l[i] - ref[i]));
        }
        // the exact update sees the clip kink only at sample resolution
        EXPECT_LT(worst, 1e-6) << "S=" << g.stroke_s << " f=" << g.freq_f;
    }
}

TEST(PropagateActuation, InitialCondition)
{
    auto const tr = propagate_actuation({}, { 0.07, 0.2 }, 1.0, 1e-3, -0.004);
    EXPECT_EQ(tr.delta_l.front(), -0.004);
    EXPECT_EQ(tr.size(), 1001u);
    EXPECT_EQ(tr.times.back(), 1.0);
}

TEST(PropagateActuation, PreloadEquilibriumForSubSlackStroke)
{
    ActuationParams const a;
    auto const tr = propagate_actuation(a, { 0.005, 0.2 }, 10.0, 1e-3);
    EXPECT_NEAR(tr.delta_l.back(), -0.00688, 1e-9);
    EXPECT_NEAR(tr.dl_dt.back(), 0.0, 1e-9);
}

TEST(PropagateActuation, RateIsConsistentWithSamples)
{
    auto const tr = propagate_actuation({}, { 0.06, 0.25 }, 8.0, 1e-3);
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
        double const fd = (tr.delta_l[i + 1] - tr.delta_l[i - 1]) / (2.0 * tr.dt);
        EXPECT_NEAR(tr.dl_dt[i], fd, 2e-4) << "t=" << tr.times[i];
    }
}

TEST(PropagateActuation, RejectsCoarseOrInvalidSteps)
{
    EXPECT_THROW((void)propagate_actuation({}, { 0.07, 0.2 }, 5.0, 0.02), ResolutionError);
    EXPECT_THROW((void)propagate_actuation({}, { 0.07, 0.2 }, 5.0, 0.0), ResolutionError);
    EXPECT_THROW((void)propagate_actuation({}, { 0.07, 0.2 }, 5e-4, 1e-3), ResolutionError);
    EXPECT_THROW((void)propagate_actuation({ 0.008, 2.0, 0.155 }, { 0.07, 0.2 }, 5.0, 1e-3), ParameterError);
}

TEST(MeasuredLengthTrace, QuadraticIsDifferentiatedExactlyWithoutSmoothing)
{
    std::vector<double> t;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
        t.push_back(i * 0.01);
        y.push_back(3.0 * t.back() * t.back() - 0.5 * t.back());
    }
    auto const tr = measured_length_trace(t, y, 1);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(tr.dl_dt[i], 6.0 * t[i] - 0.5, 1e-9);
        EXPECT_NEAR(tr.d2l_dt2[i], 6.0, 1e-6);
    }
}

TEST(MeasuredLengthTrace, SmoothingPreservesLinearSignals)
{
    std::vector<double> t;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        t.push_back(i * 0.001);
        y.push_back(0.2 - 0.3 * t.back());
    }
    auto const tr = measured_length_trace(t, y, 7);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(tr.delta_l[i], y[i], 1e-15);
        EXPECT_NEAR(tr.dl_dt[i], -0.3, 1e-9);
    }
}

TEST(MeasuredLengthTrace, RejectsBadInput)
{
    std::vector<double> const t { 0.0, 0.1, 0.2, 0.35 };
    std::vector<double> const y { 0.0, 0.0, 0.0, 0.0 };
    EXPECT_THROW((void)measured_length_trace(t, y, 3), GridError);
    std::vector<double> const tu { 0.0, 0.1, 0.2, 0.3 };
    EXPECT_THROW((void)measured_length_trace(tu, y, 4), ParameterError);
    EXPECT_THROW((void)measured_length_trace(std::vector<double> { 0.0, 0.1 }, std::vector<double> { 0.0, 0.1 }, 1), DataError);
}
