#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <wormgait/wormgait.hpp>

using namespace wormgait;

namespace {

TrackingLog tracking_of(SimTrace const& tr)
{
    return { tr.times, tr.x1, tr.body_length };
}

SimTrace short_run(GaitParams g, double dl0 = 0.0)
{
    return simulate(g, {}, {}, {}, 5, 1e-3, std::nullopt, dl0);
}

} // namespace

TEST(TruncateToRidges, CutsAfterRequestedTravel)
{
    TrackingLog log;
    for (int i = 0; i < 1000; ++i) {
        log.times.push_back(i * 0.01);
        log.x1.push_back(-0.001 * i);
        log.length.push_back(0.3);
    }
    auto const cut = truncate_to_ridges(log, 0.0173, 5);
    ASSERT_EQ(cut.size(), 88u); // first i with 0.001 i >= 0.0865
    EXPECT_GE(-cut.x1.back(), 5 * 0.0173);
    EXPECT_EQ(truncate_to_ridges(log, 0.0173, 100).size(), log.size());
}

TEST(OffsetFreeMeanSquare, IgnoresConstantShift)
{
    std::vector<double> const a { 1.0, 2.0, 4.0 };
    std::vector<double> const b { 1.5, 2.5, 4.5 };
    double offset = 0.0;
    EXPECT_NEAR(detail::offset_free_mean_square(a, b, &offset), 0.0, 1e-15);
    EXPECT_NEAR(offset, -0.5, 1e-15);
    std::vector<double> const c { 0.0, 0.0, 3.0 };
    EXPECT_NEAR(detail::offset_free_mean_square(c, std::vector<double>(3, 0.0)), 2.0, 1e-15);
}

TEST(LocomotionFit, CostIsSmallestAtTruth)
{
    std::vector<TrackingLog> const logs { tracking_of(short_run({ 0.07, 0.4 })) };
    RobotParams const truth;
    double const at_truth = locomotion_cost(logs, truth);
    for (double scale : { 0.8, 1.25 }) {
        RobotParams p = truth;
        p.eta *= scale;
        EXPECT_GT(locomotion_cost(logs, p), at_truth);
        p = truth;
        p.p_sw *= scale;
        EXPECT_GT(locomotion_cost(logs, p), at_truth);
    }
}

TEST(LocomotionFit, RecoversViscosityAndThreshold)
{
    std::vector<TrackingLog> const logs { tracking_of(short_run({ 0.07, 0.4 })), tracking_of(short_run({ 0.05, 0.3 })) };
    RobotParams known;
    known.eta = 1.0;
    FitOptions opt;
    opt.levels = 2;
    auto const rep = fit_locomotion(logs, known, std::nullopt, opt);
    EXPECT_NEAR(rep.value("eta"), 86.97, 0.02 * 86.97);
    EXPECT_NEAR(rep.value("p_sw"), 0.0175, 0.02 * 0.0175);
    EXPECT_EQ(rep.residuals.size(), logs[0].size() + logs[1].size());
    EXPECT_FALSE(rep.cost_history.empty());
    EXPECT_LE(rep.cost_history.back(), rep.cost_history.front());
}

TEST(LocomotionFit, ConstantLengthIsUnidentifiable)
{
    TrackingLog log;
    for (int i = 0; i < 200; ++i) {
        log.times.push_back(i * 1e-3);
        log.x1.push_back(0.0);
        log.length.push_back(0.3);
    }
    std::vector<TrackingLog> const logs { log };
    EXPECT_THROW((void)fit_locomotion(logs, {}), DataError);
}

TEST(LocomotionFit, RejectsTooFewSamplesAndNonUniformTime)
{
    TrackingLog log { { 0.0, 0.001 }, { 0.0, 0.0 }, { 0.3, 0.29 } };
    std::vector<TrackingLog> logs { log };
    EXPECT_THROW((void)fit_locomotion(logs, {}), DataError);
    auto tr = tracking_of(short_run({ 0.07, 0.4 }));
    tr.times[10] += 3e-4;
    logs = { tr };
    EXPECT_THROW((void)fit_locomotion(logs, {}), GridError);
}

TEST(ActuationFit, RecoversSlackGainAndTimeConstant)
{
    std::vector<ActuationRun> const runs { { tracking_of(short_run({ 0.07, 0.4 })), { 0.07, 0.4 } },
        { tracking_of(short_run({ 0.04, 0.2 })), { 0.04, 0.2 } } };
    auto const rep = fit_actuation(runs);
    EXPECT_NEAR(rep.value("delta_s"), 0.008, 0.01 * 0.008);
    EXPECT_NEAR(rep.value("gain_k"), 0.860, 0.01 * 0.860);
    EXPECT_NEAR(rep.value("tau"), 0.155, 0.01 * 0.155);
    EXPECT_TRUE(rep.converged);
    EXPECT_LT(rep.residual_rms, 1e-6);
}

TEST(ActuationFit, NoisyLengthWithinTenPercent)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.3e-3);
    auto log = tracking_of(short_run({ 0.07, 0.2 }));
    for (double& l : log.length) {
        l += noise(rng);
    }
    std::vector<ActuationRun> const runs { { log, { 0.07, 0.2 } } };
    auto const rep = fit_actuation(runs);
    EXPECT_NEAR(rep.value("delta_s"), 0.008, 0.1 * 0.008);
    EXPECT_NEAR(rep.value("gain_k"), 0.860, 0.1 * 0.860);
    EXPECT_NEAR(rep.value("tau"), 0.155, 0.1 * 0.155);
}

TEST(ActuationFit, PermanentClipIsFlaggedUnidentifiable)
{
    GaitParams const g { 0.005, 0.2 };
    std::vector<ActuationRun> const runs { { tracking_of(short_run(g)), g } };
    auto const rep = fit_actuation(runs);
    EXPECT_FALSE(rep.converged);
    ASSERT_FALSE(rep.warnings.empty());
    EXPECT_NE(rep.warnings.back().find("unidentifiable"), std::string::npos);
}

TEST(ActuationFit, TauBoundBelowTenSamplesIsRejected)
{
    std::vector<ActuationRun> const runs { { tracking_of(short_run({ 0.07, 0.4 })), { 0.07, 0.4 } } };
    std::vector<ParameterRange> const box { { 1e-4, 0.05 }, { 0.3, 1.5 }, { 0.005, 1.0 } };
    EXPECT_THROW((void)fit_actuation(runs, box), ResolutionError);
}

namespace {

std::vector<EnergyRun> energy_runs()
{
    EnergyParams const e;
    double const preload = -ActuationParams {}.gain_k * ActuationParams {}.delta_s;
    std::vector<EnergyRun> runs;
    for (GaitParams g : { GaitParams { 0.07, 0.4 }, GaitParams { 0.05, 0.3 } }) {
        auto const tr = short_run(g, preload);
        runs.push_back({ { tr.times, power_series(tr, e) }, tracking_of(tr) });
    }
    return runs;
}

} // namespace

TEST(EnergyFit, FirstSamplesOfPreloadedRunAreIdle)
{
    auto const runs = energy_runs();
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_EQ(runs[0].power.power[i], 0.82);
    }
}

TEST(EnergyFit, RecoversDampingAndEfficiency)
{
    RobotParams known;
    known.c_b = 1.0;
    auto const rep = fit_energy(energy_runs(), known);
    EXPECT_NEAR(rep.value("c_b"), 862.4, 0.02 * 862.4);
    EXPECT_NEAR(rep.value("alpha_p"), 3.22, 0.02 * 3.22);
    ASSERT_EQ(rep.extras.size(), 1u);
    EXPECT_NEAR(rep.extras[0].second, 0.82, 1e-12);
}

TEST(EnergyFit, FixedDampingMatchesClosedFormEfficiency)
{
    // With c_b fixed the predicted energy is E_idle + alpha W, so the
    // least-squares alpha is sum (E - E_idle) W / sum W^2 over all runs.
    auto const runs = energy_runs();
    RobotParams known;
    known.c_b = 700.0;
    auto const prepared = detail::prepare_energy(runs, known, {});
    double num = 0.0;
    double den = 0.0;
    for (auto const& r : prepared) {
        auto const idle = detail::predicted_energy(r, 700.0, 0.0);
        auto const one = detail::predicted_energy(r, 700.0, 1.0);
        double const w_norm = static_cast<double>(idle.size());
        for (std::size_t i = 0; i < idle.size(); ++i) {
            double const w = one[i] - idle[i];
            num += (r.measured_energy[i] - idle[i]) * w / w_norm;
            den += w * w / w_norm;
        }
    }
    double const closed_form = num / den;

    FitOptions opt;
    opt.nelder_mead.tolerance = 1e-10;
    auto const rep = fit_energy(runs, known, std::nullopt, opt, {}, 700.0);
    EXPECT_EQ(rep.value("c_b"), 700.0);
    EXPECT_NEAR(rep.value("alpha_p"), closed_form, 1e-6);
}

TEST(EnergyFit, MismatchedGridsAreRejected)
{
    auto runs = energy_runs();
    runs[0].power.times.pop_back();
    runs[0].power.power.pop_back();
    EXPECT_THROW((void)fit_energy(runs, {}), GridError);
}
