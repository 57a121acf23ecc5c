#ifndef WORMGAIT_IO_HPP
#define WORMGAIT_IO_HPP

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "wormgait/actuation.hpp"
#include "wormgait/energy.hpp"
#include "wormgait/errors.hpp"
#include "wormgait/identification.hpp"
#include "wormgait/locomotion.hpp"
#include "wormgait/optimizer.hpp"

namespace wormgait::io {

namespace detail {
    inline std::string_view trim(std::string_view s)
    {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
            s.remove_prefix(1);
        }
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
            s.remove_suffix(1);
        }
        return s;
    }

    inline std::optional<double> parse_double(std::string_view s)
    {
        s = trim(s);
        if (s == "inf" || s == "+inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        double v = 0.0;
        auto const* end = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(s.data(), end, v);
        if (ec != std::errc {} || ptr != end || s.empty()) {
            return std::nullopt;
        }
        return v;
    }

    inline std::ifstream open_in(std::filesystem::path const& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw FormatError(fmt::format("cannot open '{}' for reading", path.string()));
        }
        return in;
    }
} // namespace detail

// Full precision for anything read back as input.
inline std::string exact(double v) { return fmt::format("{:.17g}", v); }
inline std::string num(double v) { return fmt::format("{:.12g}", v); }

// --- flat key = value parameter files ---------------------------------------

/// Every tunable model parameter, keyed by field name.
struct ParameterSet {
    RobotParams robot {};
    ActuationParams actuation {};
    EnergyParams energy {};

    // l0 follows l_free unless it is set explicitly.
    bool l0_explicit = false;

    [[nodiscard]] Models models() const { return { robot, actuation, energy }; }
};

namespace detail {
    inline double* field(ParameterSet& p, std::string_view key)
    {
        auto& r = p.robot;
        auto& a = p.actuation;
        auto& e = p.energy;
        std::map<std::string_view, double*> const table {
            { "m1", &r.m1 }, { "m2", &r.m2 }, { "l_free", &r.l_free }, { "l0", &r.l0 }, { "k_b", &r.k_b },
            { "c_b", &r.c_b }, { "eta", &r.eta }, { "d", &r.d }, { "k_eng", &r.k_eng }, { "k_dis", &r.k_dis },
            { "p_sw", &r.p_sw }, { "delta_c", &r.delta_c }, { "delta_s", &a.delta_s }, { "gain_k", &a.gain_k },
            { "tau", &a.tau }, { "p_idle", &e.p_idle }, { "alpha_p", &e.alpha_p }, { "g", &e.g },
        };
        auto it = table.find(key);
        return it == table.end() ? nullptr : it->second;
    }
} // namespace detail

inline std::vector<std::string> const& parameter_keys()
{
    static std::vector<std::string> const keys { "m1", "m2", "l_free", "l0", "k_b", "c_b", "eta", "d", "k_eng",
        "k_dis", "p_sw", "delta_c", "delta_s", "gain_k", "tau", "p_idle", "alpha_p", "g" };
    return keys;
}

inline void set_parameter(ParameterSet& p, std::string_view key, double value)
{
    double* f = detail::field(p, key);
    if (f == nullptr) {
        throw FormatError(fmt::format("unknown parameter '{}'", key));
    }
    *f = value;
    if (key == "l0") {
        p.l0_explicit = true;
    }
    if (!p.l0_explicit) {
        p.robot.l0 = p.robot.l_free;
    }
}

[[nodiscard]] inline double get_parameter(ParameterSet const& p, std::string_view key)
{
    auto copy = p;
    double* f = detail::field(copy, key);
    if (f == nullptr) {
        throw FormatError(fmt::format("unknown parameter '{}'", key));
    }
    return *f;
}

/// Applies `name = value` lines; '#' starts a comment.
inline void parse_parameters(std::istream& in, ParameterSet& p, std::string const& origin = "<input>")
{
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        std::string_view s = line;
        if (auto hash = s.find('#'); hash != std::string_view::npos) {
            s = s.substr(0, hash);
        }
        s = detail::trim(s);
        if (s.empty()) {
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw FormatError(fmt::format("{}:{}: expected 'name = value'", origin, lineno));
        }
        auto key = detail::trim(s.substr(0, eq));
        auto value = detail::parse_double(s.substr(eq + 1));
        if (!value) {
            throw FormatError(fmt::format("{}:{}: value of '{}' is not a number", origin, lineno, key));
        }
        if (detail::field(p, key) == nullptr) {
            throw FormatError(fmt::format("{}:{}: unknown parameter '{}'", origin, lineno, key));
        }
        set_parameter(p, key, *value);
    }
}

inline void load_parameters(std::filesystem::path const& path, ParameterSet& p)
{
    auto in = detail::open_in(path);
    parse_parameters(in, p, path.string());
}

/// Overrides from WORMGAIT_<KEY> environment variables (key upper-cased).
inline void apply_environment(ParameterSet& p)
{
    for (auto const& key : parameter_keys()) {
        std::string var = "WORMGAIT_";
        for (char c : key) {
            var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        if (char const* v = std::getenv(var.c_str())) {
            auto value = detail::parse_double(v);
            if (!value) {
                throw FormatError(fmt::format("environment variable {}='{}' is not a number", var, v));
            }
            set_parameter(p, key, *value);
        }
    }
}

inline std::string format_parameters(ParameterSet const& p)
{
    std::string out = "# worm robot model parameters (SI units)\n";
    for (auto const& key : parameter_keys()) {
        out += fmt::format("{} = {}\n", key, exact(get_parameter(p, key)));
    }
    return out;
}

// --- CSV --------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

/// Reads a numeric CSV whose first line must equal `expected_header`.
inline Table read_csv(std::filesystem::path const& path, std::string_view expected_header)
{
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != expected_header) {
        throw FormatError(fmt::format("{}: expected header '{}'", path.string(), expected_header));
    }
    Table t;
    std::stringstream hs { std::string(expected_header) };
    for (std::string h; std::getline(hs, h, ',');) {
        t.header.push_back(h);
    }
    t.columns.resize(t.header.size());
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (detail::trim(line).empty()) {
            continue;
        }
        std::stringstream ls(line);
        std::size_t col = 0;
        for (std::string cell; std::getline(ls, cell, ','); ++col) {
            auto v = detail::parse_double(cell);
            if (col >= t.columns.size() || !v) {
                throw FormatError(fmt::format("{}:{}: malformed row (expected {} numeric columns: {})", path.string(),
                    lineno, t.header.size(), expected_header));
            }
            t.columns[col].push_back(*v);
        }
        if (col != t.columns.size()) {
            throw FormatError(fmt::format("{}:{}: expected {} columns ({})", path.string(), lineno, t.header.size(), expected_header));
        }
    }
    return t;
}

inline constexpr std::string_view kTrackingHeader = "t,x1,L";
inline constexpr std::string_view kPowerHeader = "t,P";
inline constexpr std::string_view kLengthHeader = "t,delta_l,dl_dt,d2l_dt2";
inline constexpr std::string_view kTraceHeader = "t,x1,x2,v1,v2,a1,a2,L,F_c";
inline constexpr std::string_view kEventsHeader = "t,anchor,direction";
inline constexpr std::string_view kEnergyHeader = "t,P,E";
inline constexpr std::string_view kMetricsHeader = "S,f,delta_m,v_avg,P_avg,cot";
inline constexpr std::string_view kFrontHeader = "S,f,v_avg,P_avg,cot,rank";
inline constexpr std::string_view kScanHeader = "delta_m,optimal_cot,S_opt,f_opt";
inline constexpr std::string_view kSelectedHeader = "point,S,f,v_avg,P_avg,cot";
inline constexpr std::string_view kResidualHeader = "run,t,measured,predicted,residual";

inline TrackingLog read_tracking(std::filesystem::path const& path)
{
    auto t = read_csv(path, kTrackingHeader);
    return { std::move(t.columns[0]), std::move(t.columns[1]), std::move(t.columns[2]) };
}

inline PowerLog read_power(std::filesystem::path const& path)
{
    auto t = read_csv(path, kPowerHeader);
    return { std::move(t.columns[0]), std::move(t.columns[1]) };
}

class CsvWriter {
public:
    CsvWriter(std::filesystem::path const& path, std::string_view header)
        : out_(path)
    {
        if (!out_) {
            throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
        }
        out_ << header << '\n';
    }

    template <typename... Args>
    void row(fmt::format_string<Args...> f, Args&&... args)
    {
        out_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_tracking(std::filesystem::path const& path, TrackingLog const& log)
{
    CsvWriter w(path, kTrackingHeader);
    for (std::size_t i = 0; i < log.size(); ++i) {
        w.row("{},{},{}", exact(log.times[i]), exact(log.x1[i]), exact(log.length[i]));
    }
}

inline void write_power(std::filesystem::path const& path, PowerLog const& log)
{
    CsvWriter w(path, kPowerHeader);
    for (std::size_t i = 0; i < log.size(); ++i) {
        w.row("{},{}", exact(log.times[i]), exact(log.power[i]));
    }
}

inline void write_length_trace(std::filesystem::path const& path, BodyLengthTrace const& tr)
{
    CsvWriter w(path, kLengthHeader);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        w.row("{},{},{},{}", num(tr.times[i]), num(tr.delta_l[i]), num(tr.dl_dt[i]), num(tr.d2l_dt2[i]));
    }
}

inline void write_sim_trace(std::filesystem::path const& path, SimTrace const& tr)
{
    CsvWriter w(path, kTraceHeader);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        w.row("{},{},{},{},{},{},{},{},{}", num(tr.times[i]), num(tr.x1[i]), num(tr.x2[i]), num(tr.v1[i]),
            num(tr.v2[i]), num(tr.a1[i]), num(tr.a2[i]), num(tr.body_length[i]), num(tr.cable_force[i]));
    }
}

inline void write_switch_events(std::filesystem::path const& path, SimTrace const& tr)
{
    CsvWriter w(path, kEventsHeader);
    for (auto const& e : tr.switch_events) {
        w.row("{},{},{}", num(e.t), static_cast<int>(e.anchor), e.direction);
    }
}

inline void write_energy(std::filesystem::path const& path, std::span<double const> times,
    std::span<double const> power, std::span<double const> energy)
{
    CsvWriter w(path, kEnergyHeader);
    for (std::size_t i = 0; i < times.size(); ++i) {
        w.row("{},{},{}", num(times[i]), num(power[i]), num(energy[i]));
    }
}

inline void write_metrics(std::filesystem::path const& path, GaitParams const& g, MarginSetting m, GaitMetrics const& mt)
{
    CsvWriter w(path, kMetricsHeader);
    w.row("{},{},{},{},{},{}", num(g.stroke_s), num(g.freq_f), num(m.delta_m), num(mt.v_avg), num(mt.p_avg), num(mt.cot));
}

inline void write_front(std::filesystem::path const& path, std::span<ParetoPoint const> front)
{
    CsvWriter w(path, kFrontHeader);
    for (auto const& p : front) {
        w.row("{},{},{},{},{},{}", num(p.gait.stroke_s), num(p.gait.freq_f), num(p.metrics.v_avg),
            num(p.metrics.p_avg), num(p.metrics.cot), p.rank + 1);
    }
}

inline void write_selected(std::filesystem::path const& path, RepresentativePoints const& sel)
{
    CsvWriter w(path, kSelectedHeader);
    auto put = [&](std::string_view name, ParetoPoint const& p) {
        w.row("{},{},{},{},{},{}", name, num(p.gait.stroke_s), num(p.gait.freq_f), num(p.metrics.v_avg),
            num(p.metrics.p_avg), num(p.metrics.cot));
    };
    put("min_power", sel.min_power);
    put("cruising", sel.cruising);
    put("max_speed", sel.max_speed);
}

inline void write_scan(std::filesystem::path const& path, MarginScanResult const& scan)
{
    CsvWriter w(path, kScanHeader);
    for (auto const& e : scan.entries) {
        auto const s = e.argmin ? num(e.argmin->stroke_s) : std::string("nan");
        auto const f = e.argmin ? num(e.argmin->freq_f) : std::string("nan");
        w.row("{},{},{},{}", num(e.delta_m), num(e.optimal_cot), s, f);
    }
}

inline void write_residuals(std::filesystem::path const& path, FitReport const& rep)
{
    CsvWriter w(path, kResidualHeader);
    for (auto const& r : rep.residuals) {
        w.row("{},{},{},{},{}", r.run, num(r.t), num(r.measured), num(r.predicted), num(r.measured - r.predicted));
    }
}

inline std::string format_fit_report(FitReport const& rep)
{
    std::string out;
    for (std::size_t i = 0; i < rep.names.size(); ++i) {
        out += fmt::format("{} = {}\n", rep.names[i], exact(rep.values[i]));
    }
    for (auto const& [k, v] : rep.extras) {
        out += fmt::format("{} = {}\n", k, exact(v));
    }
    out += fmt::format("cost = {}\n", exact(rep.cost));
    out += fmt::format("residual_rms = {}\n", exact(rep.residual_rms));
    out += fmt::format("iterations = {}\n", rep.iterations);
    out += fmt::format("converged = {}\n", rep.converged ? "true" : "false");
    for (auto const& w : rep.warnings) {
        out += fmt::format("# warning: {}\n", w);
    }
    return out;
}

} // namespace wormgait::io

#endif
