// Simulates the reference gait with the built-in parameters and prints
// the evaluation-window metrics for a few margins.
#include <cstdio>

#include <wormgait/wormgait.hpp>

int main()
{
    using namespace wormgait;
    RobotParams const robot;
    ActuationParams const act;
    EnergyParams const energy;
    GaitParams const gait { 0.07, 0.2 };

    std::printf("delta_m [mm]  switches  v_avg [mm/s]  P_avg [W]  COT\n");
    for (double dm : { 0.0, 0.002, 0.004, 0.008 }) {
        auto const trace = simulate(gait, robot, act, MarginSetting { dm });
        auto const power = power_series(trace, energy);
        auto const m = gait_metrics(trace, power, gait, robot, energy.g);
        std::printf("%12.1f  %8zu  %12.3f  %9.3f  %g\n", dm * 1e3, trace.switch_events.size(), m.v_avg * 1e3,
            m.p_avg, m.cot);
    }
}
