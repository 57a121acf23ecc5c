#include <cmath>

#include <gtest/gtest.h>

#include <wormgait/model.hpp>

using namespace wormgait;

TEST(CommandedGait, StartsAtRestAndReachesFullStrokeAtHalfPeriod)
{
    GaitParams const g { 0.07, 0.2 };
    EXPECT_EQ(commanded_gait(g, 0.0), 0.0);
    EXPECT_NEAR(commanded_gait(g, 2.5), -0.07, 1e-15);
    EXPECT_NEAR(commanded_gait(g, 1.25), -0.035, 1e-15);
}

TEST(CommandedGait, RateMatchesCentralDifference)
{
    GaitParams const g { 0.05, 0.3 };
    double const h = 1e-6;
    for (double t : { 0.1, 0.7, 1.3, 2.9 }) {
        double const fd = (commanded_gait(g, t + h) - commanded_gait(g, t - h)) / (2.0 * h);
        EXPECT_NEAR(commanded_gait_rate(g, t), fd, 1e-8);
    }
}

TEST(CommandedGait, StaysWithinStroke)
{
    GaitParams const g { 0.09, 0.4 };
    for (int i = 0; i <= 1000; ++i) {
        double const u = commanded_gait(g, i * 0.01);
        EXPECT_LE(u, 0.0);
        EXPECT_GE(u, -0.09 - 1e-15);
    }
}

TEST(FinForceLaw, BranchValues)
{
    FinForceLaw const fin(RobotParams {});
    EXPECT_NEAR(fin(0.010), 1833.1 * (0.010 - 0.003765), 1e-12);
    EXPECT_NEAR(fin(0.010), 11.43, 5e-3);
    EXPECT_NEAR(fin(-0.010), 442.0 * (-0.010 + 0.003765), 1e-12);
    EXPECT_NEAR(fin(-0.010), -2.756, 5e-4);
    EXPECT_EQ(fin(0.0), 0.0);
    EXPECT_EQ(fin(0.003), 0.0);
    EXPECT_EQ(fin(-0.003), 0.0);
}

TEST(FinForceLaw, ContinuousAtDeadZoneEdges)
{
    FinForceLaw const fin(RobotParams {});
    double const edge = 0.00753 / 2.0;
    EXPECT_NEAR(fin(edge + 1e-12), 0.0, 1e-8);
    EXPECT_NEAR(fin(-edge - 1e-12), 0.0, 1e-8);
}

TEST(FinForceLaw, MonotoneNondecreasing)
{
    FinForceLaw const fin(RobotParams {});
    double prev = fin(-0.05);
    for (int i = -5000; i <= 5000; ++i) {
        double const v = fin(i * 1e-5);
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(FinForceLaw, EngagedSideIsStiffer)
{
    FinForceLaw const fin(RobotParams {});
    for (double x : { 0.005, 0.01, 0.02 }) {
        EXPECT_GT(fin(x), -fin(-x));
    }
}

TEST(RobotParams, DefaultsValidate)
{
    RobotParams p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_DOUBLE_EQ(p.total_mass(), 0.858);
    EXPECT_EQ(p.l0, p.l_free);
}

TEST(RobotParams, RejectsNonPositiveAndInvertedStiffness)
{
    RobotParams p;
    p.k_b = 0.0;
    EXPECT_THROW(p.validate(), ParameterError);
    p = RobotParams {};
    p.k_dis = p.k_eng + 1.0;
    EXPECT_THROW(p.validate(), ParameterError);
    p = RobotParams {};
    p.p_sw = p.delta_c / 4.0;
    EXPECT_THROW(p.validate(), ParameterError);
}

TEST(GaitBounds, ViolationNamesTheBound)
{
    GaitBounds const b;
    auto v = b.violation({ 0.005, 0.2 });
    ASSERT_TRUE(v.has_value());
    EXPECT_NE(v->find("s_min"), std::string::npos);
    v = b.violation({ 0.05, 0.5 });
    ASSERT_TRUE(v.has_value());
    EXPECT_NE(v->find("f_max"), std::string::npos);
    EXPECT_FALSE(b.violation({ 0.05, 0.2 }).has_value());
    EXPECT_TRUE(b.contains({ 0.01, 0.08 }));
    EXPECT_TRUE(b.contains({ 0.09, 0.4 }));
}

TEST(GaitParams, RejectsNonPositive)
{
    EXPECT_THROW((GaitParams { 0.0, 0.2 }).validate(), ParameterError);
    EXPECT_THROW((GaitParams { 0.05, -1.0 }).validate(), ParameterError);
    EXPECT_DOUBLE_EQ((GaitParams { 0.05, 0.25 }).period(), 4.0);
}
