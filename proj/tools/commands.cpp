#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "wormgait/io.hpp"
#include "wormgait/parallel.hpp"
#include "wormgait/wormgait.hpp"

#ifndef WORMGAIT_VERSION
#define WORMGAIT_VERSION "unknown"
#endif

namespace wormgait::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr char const* kBuiltinParams = "table1";

// --- configuration ----------------------------------------------------------

struct ParamSources {
    std::string params = kBuiltinParams;
    std::string act;
    std::string energy;
};

io::ParameterSet load_parameter_set(ParamSources const& src)
{
    io::ParameterSet p;
    for (auto const* path : { &src.params, &src.act, &src.energy }) {
        if (path->empty() || (*path == kBuiltinParams && !fs::exists(*path))) {
            continue;
        }
        io::load_parameters(*path, p);
    }
    io::apply_environment(p);
    return p;
}

json config_to_json(io::ParameterSet const& p)
{
    json j = json::object();
    for (auto const& key : io::parameter_keys()) {
        j[key] = io::get_parameter(p, key);
    }
    return j;
}

io::ParameterSet config_from_json(json const& j)
{
    io::ParameterSet p;
    for (auto const& [key, value] : j.items()) {
        io::set_parameter(p, key, value.get<double>());
    }
    // the snapshot is complete, so l0 is always explicit
    io::set_parameter(p, "l0", j.at("l0").get<double>());
    return p;
}

GaitParams parse_gait(std::string const& s)
{
    auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw UsageError(fmt::format("--gait expects 'S,f' (got '{}')", s));
    }
    auto S = io::detail::parse_double(s.substr(0, comma));
    auto f = io::detail::parse_double(s.substr(comma + 1));
    if (!S || !f || !(*S > 0.0) || !(*f > 0.0)) {
        throw UsageError(fmt::format("--gait expects two positive numbers 'S,f' (got '{}')", s));
    }
    return { *S, *f };
}

std::vector<double> parse_grid_spec(std::string const& s)
{
    std::vector<double> parts;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ':');) {
        auto v = io::detail::parse_double(item);
        if (!v) {
            throw UsageError(fmt::format("--grid expects MIN:STEP:MAX (got '{}')", s));
        }
        parts.push_back(*v);
    }
    if (parts.size() != 3) {
        throw UsageError(fmt::format("--grid expects MIN:STEP:MAX (got '{}')", s));
    }
    if (!(parts[1] > 0.0) || !(parts[2] >= parts[0]) || parts[0] < 0.0) {
        throw UsageError(fmt::format("--grid {} must be increasing: 0 <= MIN <= MAX and STEP > 0", s));
    }
    return parts;
}

GaitBounds bounds_from_json(json const& j)
{
    GaitBounds b;
    if (j.is_array()) {
        b = { j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>() };
    }
    try {
        b.validate();
    } catch (ParameterError const& e) {
        throw UsageError(e.what());
    }
    return b;
}

json bounds_option(std::vector<double> const& v)
{
    if (v.empty()) {
        return nullptr;
    }
    if (v.size() != 4) {
        throw UsageError("--bounds expects s_min,s_max,f_min,f_max");
    }
    return v;
}

GaitParams gait_in_bounds(json const& opt)
{
    GaitParams g { opt.at("gait").at(0).get<double>(), opt.at("gait").at(1).get<double>() };
    if (auto v = bounds_from_json(opt.value("bounds", json())).violation(g)) {
        throw UsageError(fmt::format("gait out of bounds: {}", *v));
    }
    return g;
}

// --- manifest ---------------------------------------------------------------

std::string utc_timestamp()
{
    auto const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm {};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunContext {
    std::string command;
    json options;
    io::ParameterSet params;
    fs::path out_dir;
    std::ostream* err;
    json inputs = json::object();
};

void write_manifest(RunContext const& ctx, std::vector<std::string> const& outputs, json results = json::object())
{
    json m;
    m["command"] = ctx.command;
    m["version"] = WORMGAIT_VERSION;
    m["timestamp"] = utc_timestamp();
    m["options"] = ctx.options;
    m["config"] = config_to_json(ctx.params);
    m["inputs"] = ctx.inputs;
    m["outputs"] = outputs;
    m["seed"] = ctx.options.contains("seed") ? ctx.options["seed"] : json(nullptr);
    m["results"] = std::move(results);
    std::ofstream f(ctx.out_dir / "manifest.json");
    f << m.dump(2) << '\n';
}

void warn(RunContext const& ctx, std::string const& msg)
{
    *ctx.err << "warning: " << msg << '\n';
}

void write_text(fs::path const& path, std::string const& text)
{
    std::ofstream f(path);
    if (!f) {
        throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
    }
    f << text;
}

// --- commands ---------------------------------------------------------------

void exec_simulate(RunContext& ctx)
{
    auto const& opt = ctx.options;
    auto const gait = gait_in_bounds(opt);
    MarginSetting const margin { opt.at("margin").get<double>() };
    int const cycles = opt.at("cycles").get<int>();
    double const dt = opt.at("dt").get<double>();
    double const dl0 = opt.value("preload", false) ? -ctx.params.actuation.gain_k * ctx.params.actuation.delta_s : 0.0;
    if (margin.delta_m < 0.0) {
        throw UsageError("--margin must be nonnegative");
    }
    if (cycles < 5) {
        throw UsageError("--cycles must be at least 5 (metrics use the last three of five cycles)");
    }

    auto const models = ctx.params.models();
    models.validate();
    auto const trace = simulate(gait, models.robot, models.actuation, margin, cycles, dt, std::nullopt, dl0);
    auto const power = power_series(trace, models.energy);
    auto const energy = accumulate_energy(power, trace.dt);
    auto const metrics = gait_metrics(trace, power, gait, models.robot, models.energy.g);

    io::write_sim_trace(ctx.out_dir / "trace.csv", trace);
    io::write_switch_events(ctx.out_dir / "events.csv", trace);
    io::write_energy(ctx.out_dir / "power.csv", trace.times, power, energy);
    io::write_metrics(ctx.out_dir / "metrics.csv", gait, margin, metrics);
    if (metrics.v_avg <= kMinSpeed) {
        warn(ctx, "the gait does not locomote over the evaluation window; cost of transport is infinite");
    }
    write_manifest(ctx, { "trace.csv", "events.csv", "power.csv", "metrics.csv" },
        { { "v_avg", metrics.v_avg }, { "P_avg", metrics.p_avg }, { "switches", trace.switch_events.size() } });
}

void exec_synth(RunContext& ctx)
{
    auto const& opt = ctx.options;
    GaitParams const gait { opt.at("gait").at(0).get<double>(), opt.at("gait").at(1).get<double>() };
    MarginSetting const margin { opt.at("margin").get<double>() };
    auto const models = ctx.params.models();
    models.validate();
    double const dl0 = opt.at("preload").get<bool>() ? -models.actuation.gain_k * models.actuation.delta_s : 0.0;
    auto const trace = simulate(gait, models.robot, models.actuation, margin, opt.at("cycles").get<int>(),
        opt.at("dt").get<double>(), std::nullopt, dl0);
    auto power = power_series(trace, models.energy);

    std::mt19937_64 rng(opt.at("seed").get<std::uint64_t>());
    auto noisy = [&](double v, double sigma) {
        return sigma > 0.0 ? v + std::normal_distribution<double>(0.0, sigma)(rng) : v;
    };
    TrackingLog log { trace.times, trace.x1, trace.body_length };
    for (std::size_t i = 0; i < log.size(); ++i) {
        log.x1[i] = noisy(log.x1[i], opt.at("noise_position").get<double>());
        log.length[i] = noisy(log.length[i], opt.at("noise_length").get<double>());
    }
    for (auto& p : power) {
        p = std::max(0.0, noisy(p, opt.at("noise_power").get<double>()));
    }
    io::write_tracking(ctx.out_dir / "tracking.csv", log);
    io::write_power(ctx.out_dir / "power.csv", { trace.times, power });
    write_manifest(ctx, { "tracking.csv", "power.csv" });
}

void exec_identify(RunContext& ctx)
{
    auto const& opt = ctx.options;
    auto const mode = opt.at("mode").get<std::string>();
    auto const tracking_paths = opt.at("tracking").get<std::vector<std::string>>();
    auto const power_paths = opt.at("power").get<std::vector<std::string>>();
    int const ridges = opt.at("ridges").get<int>();
    if (tracking_paths.empty()) {
        throw UsageError("--tracking is required");
    }
    if (mode == "energy" && power_paths.empty()) {
        throw UsageError("--power is required in energy mode");
    }
    if (mode == "energy" && power_paths.size() != tracking_paths.size()) {
        throw UsageError("energy mode needs one --power file per --tracking file");
    }

    FitOptions fit;
    fit.jobs = opt.at("jobs").get<unsigned>();
    MeasuredDriveSettings drive;
    drive.smoothing_window = opt.at("smoothing").get<std::size_t>();
    if (drive.smoothing_window % 2 == 0) {
        throw UsageError("--smoothing must be odd");
    }

    std::vector<TrackingLog> logs;
    for (auto const& p : tracking_paths) {
        auto log = io::read_tracking(p);
        if (ridges > 0) {
            log = truncate_to_ridges(log, ctx.params.robot.d, ridges);
        }
        logs.push_back(std::move(log));
    }
    ctx.inputs["tracking"] = tracking_paths;

    FitReport rep;
    io::ParameterSet fitted = ctx.params;
    if (mode == "locomotion") {
        rep = fit_locomotion(logs, ctx.params.robot, std::nullopt, fit, drive);
        fitted.robot.eta = rep.value("eta");
        fitted.robot.p_sw = rep.value("p_sw");
    } else if (mode == "actuation") {
        auto const gaits = opt.at("gait");
        if (gaits.empty()) {
            throw UsageError("--gait is required in actuation mode");
        }
        if (gaits.size() != 1 && gaits.size() != logs.size()) {
            throw UsageError("give one --gait, or one per --tracking file");
        }
        std::vector<ActuationRun> runs;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            auto const& g = gaits.at(gaits.size() == 1 ? 0 : i);
            runs.push_back({ logs[i], { g.at(0).get<double>(), g.at(1).get<double>() } });
        }
        rep = fit_actuation(runs, std::nullopt, fit);
        fitted.actuation = { rep.value("delta_s"), rep.value("gain_k"), rep.value("tau") };
    } else if (mode == "energy") {
        std::vector<EnergyRun> runs;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            auto power = io::read_power(power_paths[i]);
            if (ridges > 0) {
                power.times.resize(std::min(power.size(), logs[i].size()));
                power.power.resize(power.times.size());
            }
            runs.push_back({ std::move(power), logs[i] });
        }
        ctx.inputs["power"] = power_paths;
        rep = fit_energy(runs, ctx.params.robot, std::nullopt, fit, drive);
        fitted.robot.c_b = rep.value("c_b");
        fitted.energy.alpha_p = rep.value("alpha_p");
        fitted.energy.p_idle = rep.extras.front().second;
    } else {
        throw UsageError(fmt::format("--mode must be locomotion, actuation or energy (got '{}')", mode));
    }

    write_text(ctx.out_dir / "fit_report.txt", io::format_fit_report(rep));
    io::write_residuals(ctx.out_dir / "residuals.csv", rep);
    write_text(ctx.out_dir / "fitted_params.txt", io::format_parameters(fitted));
    for (auto const& w : rep.warnings) {
        warn(ctx, w);
    }
    if (!rep.converged) {
        warn(ctx, "fit did not converge");
    }
    json results = json::object();
    for (std::size_t i = 0; i < rep.names.size(); ++i) {
        results[rep.names[i]] = rep.values[i];
    }
    results["cost"] = rep.cost;
    results["converged"] = rep.converged;
    write_manifest(ctx, { "fit_report.txt", "residuals.csv", "fitted_params.txt" }, results);
}

OptimizerConfig optimizer_config(json const& opt)
{
    OptimizerConfig cfg;
    cfg.ga.population = opt.at("pop").get<std::size_t>();
    cfg.ga.generations = opt.at("gens").get<std::size_t>();
    cfg.ga.seed = opt.at("seed").get<std::uint64_t>();
    cfg.sim.dt = opt.at("dt").get<double>();
    cfg.sim.n_cycles = opt.at("cycles").get<int>();
    cfg.jobs = opt.at("jobs").get<unsigned>();
    cfg.bounds = bounds_from_json(opt.value("bounds", json()));
    try {
        cfg.ga.validate();
    } catch (ParameterError const& e) {
        throw UsageError(e.what());
    }
    if (cfg.sim.n_cycles < 5) {
        throw UsageError("--cycles must be at least 5");
    }
    return cfg;
}

void exec_optimize(RunContext& ctx)
{
    auto cfg = optimizer_config(ctx.options);
    cfg.margin = MarginSetting { ctx.options.at("margin").get<double>() };
    if (cfg.margin.delta_m < 0.0) {
        throw UsageError("--margin must be nonnegative");
    }
    GaitEvaluator evaluator(ctx.params.models(), cfg.sim, cfg.jobs);
    auto const res = optimize_gaits(cfg, evaluator);
    auto const sel = select_representative_points(res.front);

    io::write_front(ctx.out_dir / "front.csv", res.front);
    io::write_selected(ctx.out_dir / "selected.csv", sel);
    bool const any_motion = std::any_of(res.front.begin(), res.front.end(), [](auto const& p) { return p.metrics.v_avg > 0.0; });
    if (!any_motion) {
        warn(ctx, "no gait on the front locomotes (all average speeds are zero)");
    }
    write_manifest(ctx, { "front.csv", "selected.csv" },
        { { "front_size", res.front.size() }, { "evaluations", res.evaluations },
            { "hypervolume", res.hypervolume.empty() ? 0.0 : res.hypervolume.back() } });
}

void exec_scan_margin(RunContext& ctx)
{
    auto const& opt = ctx.options;
    auto cfg = optimizer_config(opt);
    auto const spec = opt.at("grid").get<std::vector<double>>();
    auto const grid = margin_grid(spec[0], spec[1], spec[2]);
    MarginScanOptions scan_opt;
    scan_opt.jump_factor = opt.at("jump_factor").get<double>();
    auto const kind = opt.at("cot").get<std::string>();
    if (kind == "weight") {
        scan_opt.cot_kind = CotKind::WeightNormalized;
    } else if (kind == "per-meter") {
        scan_opt.cot_kind = CotKind::PerMeter;
    } else {
        throw UsageError(fmt::format("--cot must be 'weight' or 'per-meter' (got '{}')", kind));
    }
    if (!(scan_opt.jump_factor > 1.0)) {
        throw UsageError("--jump-factor must exceed 1");
    }

    GaitEvaluator evaluator(ctx.params.models(), cfg.sim, cfg.jobs);
    auto const scan = margin_scan(grid, cfg, evaluator, scan_opt);
    io::write_scan(ctx.out_dir / "scan.csv", scan);
    for (auto const& w : scan.warnings) {
        warn(ctx, w);
    }
    json results;
    results["cliff_delta_m"] = scan.cliff ? json(*scan.cliff) : json(nullptr);
    write_manifest(ctx, { "scan.csv" }, results);
}

void exec_params(RunContext& ctx)
{
    write_text(ctx.out_dir / "params.txt", io::format_parameters(ctx.params));
    write_manifest(ctx, { "params.txt" });
}

using Exec = void (*)(RunContext&);

Exec executor(std::string const& command)
{
    if (command == "simulate") return exec_simulate;
    if (command == "synth") return exec_synth;
    if (command == "identify") return exec_identify;
    if (command == "optimize") return exec_optimize;
    if (command == "scan-margin") return exec_scan_margin;
    if (command == "params") return exec_params;
    throw UsageError(fmt::format("unknown command '{}'", command));
}

void execute(RunContext& ctx)
{
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) {
        throw UsageError(fmt::format("cannot create output directory '{}': {}", ctx.out_dir.string(), ec.message()));
    }
    executor(ctx.command)(ctx);
}

} // namespace

int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err)
{
    CLI::App app { "Worm-robot gait modeling, identification and robust optimization", "wormgait" };
    app.set_version_flag("--version", std::string(WORMGAIT_VERSION));
    app.require_subcommand(1);

    ParamSources sources;
    std::string out_dir;
    std::string gait;
    std::vector<std::string> gaits;
    std::vector<double> bounds;
    double margin = 0.0;
    int cycles = 5;
    double dt = 1e-3;
    unsigned jobs = default_jobs();
    std::size_t pop = 64;
    std::size_t gens = 60;
    std::uint64_t seed = 1;

    auto add_params = [&](CLI::App* sub, bool model_files) {
        sub->add_option("--params", sources.params, "parameter file, or 'table1' for the built-in set");
        if (model_files) {
            sub->add_option("--act", sources.act, "actuation parameter file");
            sub->add_option("--energy", sources.energy, "energy parameter file");
        }
        sub->add_option("--out", out_dir, "output directory")->required();
    };

    auto* sim = app.add_subcommand("simulate", "simulate one gait and write trace, power and metrics");
    add_params(sim, true);
    sim->add_option("--gait", gait, "stroke and frequency 'S,f'")->required();
    sim->add_option("--margin", margin, "robustness margin (m)");
    sim->add_option("--cycles", cycles, "actuation cycles");
    sim->add_option("--dt", dt, "time step (s)");
    sim->add_option("--bounds", bounds, "admissible gait box s_min,s_max,f_min,f_max")->delimiter(',');
    bool preload = false;
    sim->add_flag("--preload", preload, "start from the clipped-input equilibrium instead of dL = 0");

    auto* synth = app.add_subcommand("synth", "emulate an experiment: write tracking and power logs from the model");
    add_params(synth, true);
    synth->add_option("--gait", gait, "stroke and frequency 'S,f'")->required();
    synth->add_option("--margin", margin, "robustness margin (m)");
    synth->add_option("--cycles", cycles, "actuation cycles");
    synth->add_option("--dt", dt, "sampling step (s)");
    synth->add_option("--seed", seed, "noise seed");
    double noise_position = 0.0;
    double noise_length = 0.0;
    double noise_power = 0.0;
    synth->add_option("--noise-position", noise_position, "std. dev. of x1 noise (m)");
    synth->add_option("--noise-length", noise_length, "std. dev. of body-length noise (m)");
    synth->add_option("--noise-power", noise_power, "std. dev. of power noise (W)");
    synth->add_flag("--preload", preload, "start from the clipped-input equilibrium (idle first samples)");

    auto* ident = app.add_subcommand("identify", "fit model parameters to experiment logs");
    add_params(ident, false);
    std::string mode;
    std::vector<std::string> tracking;
    std::vector<std::string> power;
    int ridges = 0;
    std::size_t smoothing = 5;
    ident->add_option("--mode", mode, "locomotion, actuation or energy")->required();
    ident->add_option("--tracking", tracking, "tracking CSV (t,x1,L); repeat for several runs")->required();
    ident->add_option("--power", power, "power CSV (t,P); one per tracking file");
    ident->add_option("--gait", gaits, "commanded gait 'S,f' (actuation mode)");
    ident->add_option("--ridges", ridges, "truncate each run after this many ridges of travel");
    ident->add_option("--smoothing", smoothing, "moving-average window for measured length (odd)");
    ident->add_option("--jobs", jobs, "parallel multi-start workers");

    auto add_opt_flags = [&](CLI::App* sub) {
        sub->add_option("--pop", pop, "population size (even)");
        sub->add_option("--gens", gens, "generations");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--dt", dt, "simulation step (s)");
        sub->add_option("--cycles", cycles, "simulated cycles per evaluation");
        sub->add_option("--jobs", jobs, "parallel evaluation workers");
        sub->add_option("--bounds", bounds, "gait box s_min,s_max,f_min,f_max")->delimiter(',');
    };

    auto* optimize = app.add_subcommand("optimize", "robust speed/power Pareto optimization of the gait");
    add_params(optimize, true);
    optimize->add_option("--margin", margin, "robustness margin (m)")->required();
    add_opt_flags(optimize);

    auto* scan = app.add_subcommand("scan-margin", "price-of-robustness scan over the margin");
    add_params(scan, true);
    std::string grid;
    double jump_factor = 2.0;
    std::string cot_kind = "weight";
    scan->add_option("--grid", grid, "margin grid MIN:STEP:MAX (m)")->required();
    scan->add_option("--jump-factor", jump_factor, "cliff when optimal COT grows by more than this between grid points");
    scan->add_option("--cot", cot_kind, "cost of transport: 'weight' (P/(m g v)) or 'per-meter' (P/v)");
    add_opt_flags(scan);

    auto* params = app.add_subcommand("params", "write the resolved parameter set");
    add_params(params, true);

    auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
    std::string manifest_path;
    replay->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
    replay->add_option("--out", out_dir, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (CLI::CallForHelp const&) {
        out << app.help();
        return kExitOk;
    } catch (CLI::CallForVersion const&) {
        out << WORMGAIT_VERSION << '\n';
        return kExitOk;
    } catch (CLI::ParseError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        RunContext ctx;
        ctx.err = &err;
        ctx.out_dir = out_dir;
        if (replay->parsed()) {
            std::ifstream f(manifest_path);
            if (!f) {
                throw UsageError(fmt::format("cannot open manifest '{}'", manifest_path));
            }
            json m;
            try {
                m = json::parse(f);
            } catch (json::exception const& e) {
                throw UsageError(fmt::format("manifest '{}' is not valid JSON: {}", manifest_path, e.what()));
            }
            ctx.command = m.at("command").get<std::string>();
            ctx.options = m.at("options");
            ctx.params = config_from_json(m.at("config"));
            ctx.inputs = m.value("inputs", json::object());
            execute(ctx);
            return kExitOk;
        }

        auto* sub = app.get_subcommands().front();
        ctx.command = sub->get_name();
        ctx.params = load_parameter_set(sources);
        ctx.inputs["params"] = sources.params;
        if (!sources.act.empty()) {
            ctx.inputs["act"] = sources.act;
        }
        if (!sources.energy.empty()) {
            ctx.inputs["energy"] = sources.energy;
        }
        json& o = ctx.options;
        o = json::object();
        if (sub == sim) {
            auto g = parse_gait(gait);
            o = { { "gait", { g.stroke_s, g.freq_f } }, { "margin", margin }, { "cycles", cycles }, { "dt", dt },
                { "bounds", bounds_option(bounds) }, { "preload", preload } };
        } else if (sub == synth) {
            auto g = parse_gait(gait);
            o = { { "gait", { g.stroke_s, g.freq_f } }, { "margin", margin }, { "cycles", cycles }, { "dt", dt },
                { "seed", seed }, { "noise_position", noise_position }, { "noise_length", noise_length },
                { "noise_power", noise_power }, { "preload", preload } };
        } else if (sub == ident) {
            json gj = json::array();
            for (auto const& s : gaits) {
                auto g = parse_gait(s);
                gj.push_back({ g.stroke_s, g.freq_f });
            }
            o = { { "mode", mode }, { "tracking", tracking }, { "power", power }, { "gait", gj }, { "ridges", ridges },
                { "smoothing", smoothing }, { "jobs", jobs } };
        } else if (sub == optimize || sub == scan) {
            o = { { "pop", pop }, { "gens", gens }, { "seed", seed }, { "dt", dt }, { "cycles", cycles },
                { "jobs", jobs }, { "bounds", bounds_option(bounds) } };
            if (sub == optimize) {
                o["margin"] = margin;
            } else {
                o["grid"] = parse_grid_spec(grid);
                o["jump_factor"] = jump_factor;
                o["cot"] = cot_kind;
            }
        }
        execute(ctx);
        return kExitOk;
    } catch (UsageError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (FormatError const& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (ModelError const& e) {
        err << "model error: " << e.what() << '\n';
        return kExitModel;
    } catch (json::exception const& e) {
        err << "error: malformed manifest: " << e.what() << '\n';
        return kExitUsage;
    }
}

} // namespace wormgait::cli
