#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "commands.hpp"

namespace fs = std::filesystem;
using wormgait::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> const& args)
{
    std::ostringstream out;
    std::ostringstream err;
    int const code = run(args, out, err);
    return { code, out.str(), err.str() };
}

fs::path fresh_dir(std::string const& name)
{
    auto dir = fs::temp_directory_path() / "wormgait_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(fs::path const& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST(Cli, SimulateWritesOutputsAndManifest)
{
    auto const dir = fresh_dir("simulate");
    auto const r = cli({ "simulate", "--params", "table1", "--gait", "0.07,0.2", "--out", dir.string() });
    ASSERT_EQ(r.code, 0) << r.err;
    for (char const* f : { "trace.csv", "events.csv", "power.csv", "metrics.csv", "manifest.json" }) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    auto const m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(m["command"], "simulate");
    EXPECT_EQ(m["config"]["k_eng"].get<double>(), 1833.1);
    EXPECT_EQ(slurp(dir / "trace.csv").substr(0, 26), "t,x1,x2,v1,v2,a1,a2,L,F_c\n");
}

TEST(Cli, GaitOutsideBoundsIsUsageError)
{
    auto const dir = fresh_dir("bounds");
    auto const r = cli({ "simulate", "--gait", "0.2,0.2", "--out", dir.string() });
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("s_max"), std::string::npos);
}

TEST(Cli, CoarseStepIsModelError)
{
    auto const dir = fresh_dir("coarse");
    auto const r = cli({ "simulate", "--gait", "0.07,0.2", "--dt", "0.01", "--out", dir.string() });
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, MissingOrBadArgumentsAreUsageErrors)
{
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({ "simulate", "--out", "x" }).code, 2);
    EXPECT_EQ(cli({ "simulate", "--gait", "abc", "--out", "x" }).code, 2);
    EXPECT_EQ(cli({ "frobnicate" }).code, 2);
    EXPECT_EQ(cli({ "simulate", "--params", "/nonexistent/params.txt", "--gait", "0.07,0.2", "--out", "x" }).code, 2);
    EXPECT_EQ(cli({ "--help" }).code, 0);
}

TEST(Cli, ParamsFileAndEnvironmentLayering)
{
    auto const dir = fresh_dir("params");
    std::ofstream(dir / "p.txt") << "eta = 100\n";
    std::ofstream(dir / "act.txt") << "tau = 0.2\n";
    ::setenv("WORMGAIT_ETA", "120", 1);
    auto const r = cli({ "params", "--params", (dir / "p.txt").string(), "--act", (dir / "act.txt").string(), "--out",
        (dir / "out").string() });
    ::unsetenv("WORMGAIT_ETA");
    ASSERT_EQ(r.code, 0) << r.err;
    auto const text = slurp(dir / "out" / "params.txt");
    EXPECT_NE(text.find("eta = 120"), std::string::npos);
    EXPECT_NE(text.find("tau = 0.20000000000000001"), std::string::npos);
}

TEST(Cli, SynthThenIdentifyActuation)
{
    auto const dir = fresh_dir("identify");
    auto const s = cli({ "synth", "--gait", "0.07,0.4", "--out", (dir / "data").string() });
    ASSERT_EQ(s.code, 0) << s.err;
    auto const r = cli({ "identify", "--mode", "actuation", "--tracking", (dir / "data" / "tracking.csv").string(), "--gait",
        "0.07,0.4", "--out", (dir / "fit").string() });
    ASSERT_EQ(r.code, 0) << r.err;
    auto const report = slurp(dir / "fit" / "fit_report.txt");
    EXPECT_NE(report.find("tau = 0.15"), std::string::npos) << report;
    EXPECT_TRUE(fs::exists(dir / "fit" / "residuals.csv"));
    EXPECT_TRUE(fs::exists(dir / "fit" / "fitted_params.txt"));
}

TEST(Cli, IdentifyArgumentErrors)
{
    auto const dir = fresh_dir("identify_errors");
    ASSERT_EQ(cli({ "synth", "--gait", "0.07,0.4", "--out", dir.string() }).code, 0);
    auto const tracking = (dir / "tracking.csv").string();
    EXPECT_EQ(cli({ "identify", "--mode", "energy", "--tracking", tracking, "--out", (dir / "e").string() }).code, 2);
    EXPECT_EQ(cli({ "identify", "--mode", "actuation", "--tracking", tracking, "--out", (dir / "a").string() }).code, 2);
    EXPECT_EQ(cli({ "identify", "--mode", "bogus", "--tracking", tracking, "--out", (dir / "b").string() }).code, 2);
    std::ofstream(dir / "bad.csv") << "time,x,L\n0,0,0.3\n";
    auto const r = cli({ "identify", "--mode", "locomotion", "--tracking", (dir / "bad.csv").string(), "--out",
        (dir / "c").string() });
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("t,x1,L"), std::string::npos);
}

TEST(Cli, ScanMarginGridValidation)
{
    auto const dir = fresh_dir("scan");
    EXPECT_EQ(cli({ "scan-margin", "--grid", "0.004:0.001:0.001", "--out", dir.string() }).code, 2);
    EXPECT_EQ(cli({ "scan-margin", "--grid", "0:0.001", "--out", dir.string() }).code, 2);
    auto const r = cli({ "scan-margin", "--grid", "0:0.001:0", "--pop", "8", "--gens", "1", "--dt", "0.002", "--out",
        dir.string() });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("no cliff"), std::string::npos);
    auto const m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_TRUE(m["results"]["cliff_delta_m"].is_null());
}

TEST(Cli, OptimizeIsReproducibleAndReplayable)
{
    auto const dir = fresh_dir("optimize");
    std::vector<std::string> args { "optimize", "--margin", "0.001", "--pop", "8", "--gens", "2", "--dt", "0.002", "--seed",
        "5", "--jobs", "2", "--out" };
    auto a = args;
    a.push_back((dir / "a").string());
    auto b = args;
    b.push_back((dir / "b").string());
    ASSERT_EQ(cli(a).code, 0);
    ASSERT_EQ(cli(b).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "front.csv"), slurp(dir / "b" / "front.csv"));
    EXPECT_TRUE(fs::exists(dir / "a" / "selected.csv"));

    auto const r = cli({ "replay", "--manifest", (dir / "a" / "manifest.json").string(), "--out", (dir / "r").string() });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(dir / "a" / "front.csv"), slurp(dir / "r" / "front.csv"));
    EXPECT_EQ(slurp(dir / "a" / "selected.csv"), slurp(dir / "r" / "selected.csv"));
}

TEST(Cli, ReplayOfSimulateIsByteIdentical)
{
    auto const dir = fresh_dir("replay_sim");
    ::setenv("WORMGAIT_ETA", "95", 1);
    auto const r0 = cli({ "simulate", "--gait", "0.05,0.3", "--margin", "0.002", "--out", (dir / "a").string() });
    ::unsetenv("WORMGAIT_ETA");
    ASSERT_EQ(r0.code, 0);
    auto const r = cli({ "replay", "--manifest", (dir / "a" / "manifest.json").string(), "--out", (dir / "b").string() });
    ASSERT_EQ(r.code, 0) << r.err;
    for (char const* f : { "trace.csv", "events.csv", "power.csv", "metrics.csv" }) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
    EXPECT_EQ(cli({ "replay", "--manifest", (dir / "missing.json").string(), "--out", (dir / "c").string() }).code, 2);
}

TEST(Cli, IdentifyLocomotionOnSyntheticLogConverges)
{
    auto const dir = fresh_dir("identify_loco");
    ASSERT_EQ(cli({ "synth", "--gait", "0.07,0.2", "--out", (dir / "data").string() }).code, 0);
    auto const r = cli({ "identify", "--mode", "locomotion", "--tracking", (dir / "data" / "tracking.csv").string(), "--out",
        (dir / "fit").string() });
    ASSERT_EQ(r.code, 0) << r.err;
    auto const report = slurp(dir / "fit" / "fit_report.txt");
    EXPECT_NE(report.find("converged = true"), std::string::npos) << report;
    EXPECT_NE(report.find("eta = 86.97"), std::string::npos) << report;
}

TEST(Cli, OptimizeWithHugeMarginWarnsNothingLocomotes)
{
    auto const dir = fresh_dir("optimize_margin");
    auto const r = cli({ "optimize", "--margin", "1.0", "--pop", "8", "--gens", "1", "--dt", "0.002", "--out", dir.string() });
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("no gait on the front locomotes"), std::string::npos);
    std::istringstream front(slurp(dir / "front.csv"));
    std::string line;
    std::getline(front, line);
    int rows = 0;
    while (std::getline(front, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (int i = 0; i < 3; ++i) {
            std::getline(ss, cell, ',');
        }
        EXPECT_EQ(std::stod(cell), 0.0) << line;
        ++rows;
    }
    EXPECT_GT(rows, 0);
}
