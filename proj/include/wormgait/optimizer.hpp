#ifndef WORMGAIT_OPTIMIZER_HPP
#define WORMGAIT_OPTIMIZER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "wormgait/actuation.hpp"
#include "wormgait/energy.hpp"
#include "wormgait/errors.hpp"
#include "wormgait/locomotion.hpp"
#include "wormgait/model.hpp"
#include "wormgait/nsga2.hpp"
#include "wormgait/parallel.hpp"

namespace wormgait {

/// The identified model chain a gait is evaluated against.
struct Models {
    RobotParams robot {};
    ActuationParams actuation {};
    EnergyParams energy {};

    void validate() const
    {
        robot.validate();
        actuation.validate();
        energy.validate();
    }
};

struct SimSettings {
    int n_cycles = 5;
    double dt = 1e-3;
};

struct OptimizerConfig {
    nsga2::Config ga {};
    GaitBounds bounds {};
    MarginSetting margin {};
    SimSettings sim {};
    unsigned jobs = 1;
    double hv_reference_power = 100.0; // W; hypervolume reference is (v = 0, P = this)
};

struct ParetoPoint {
    GaitParams gait;
    GaitMetrics metrics;
    std::size_t rank = 0;
    double crowding = 0.0;
};

/// Commanded gait -> slack clip and actuation -> hybrid locomotion with the
/// robust switching threshold -> power -> metrics over cycles 3..5.
[[nodiscard]] inline GaitMetrics evaluate_gait(GaitParams const& gait, Models const& models, MarginSetting margin,
    SimSettings const& sim = {})
{
    auto const trace = simulate(gait, models.robot, models.actuation, margin, sim.n_cycles, sim.dt);
    auto const power = power_series(trace, models.energy);
    return gait_metrics(trace, power, gait, models.robot, models.energy.g);
}

/// Memoizing, optionally parallel gait evaluator. Keys are (S, f, delta_m)
/// quantized to 1e-6.
class GaitEvaluator {
public:
    GaitEvaluator(Models models, SimSettings sim, unsigned jobs = 1)
        : models_(std::move(models)), sim_(sim), jobs_(jobs)
    {
        models_.validate();
    }

    [[nodiscard]] GaitMetrics operator()(GaitParams const& gait, MarginSetting margin)
    {
        auto const out = evaluate_batch(std::span<GaitParams const>(&gait, 1), margin);
        return out.front();
    }

    std::vector<GaitMetrics> evaluate_batch(std::span<GaitParams const> gaits, MarginSetting margin)
    {
        std::vector<GaitMetrics> out(gaits.size());
        std::vector<std::size_t> todo;
        std::map<Key, std::size_t> first_of_key;
        for (std::size_t i = 0; i < gaits.size(); ++i) {
            auto const key = make_key(gaits[i], margin);
            if (auto it = cache_.find(key); it != cache_.end()) {
                out[i] = it->second;
                ++hits_;
            } else if (first_of_key.emplace(key, i).second) {
                todo.push_back(i);
            }
        }
        std::vector<GaitMetrics> fresh(todo.size());
        parallel_for(todo.size(), jobs_, [&](std::size_t k) {
            fresh[k] = evaluate_gait(gaits[todo[k]], models_, margin, sim_);
        });
        for (std::size_t k = 0; k < todo.size(); ++k) {
            cache_.emplace(make_key(gaits[todo[k]], margin), fresh[k]);
        }
        evaluations_ += todo.size();
        for (std::size_t i = 0; i < gaits.size(); ++i) {
            auto const key = make_key(gaits[i], margin);
            if (first_of_key.count(key) != 0) {
                out[i] = cache_.at(key);
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t evaluations() const noexcept { return evaluations_; }
    [[nodiscard]] std::size_t cache_hits() const noexcept { return hits_; }
    [[nodiscard]] Models const& models() const noexcept { return models_; }
    [[nodiscard]] SimSettings const& sim() const noexcept { return sim_; }

private:
    using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

    static Key make_key(GaitParams const& g, MarginSetting m)
    {
        auto q = [](double v) { return static_cast<std::int64_t>(std::llround(v * 1e6)); };
        return { q(g.stroke_s), q(g.freq_f), q(m.delta_m) };
    }

    Models models_;
    SimSettings sim_;
    unsigned jobs_;
    std::map<Key, GaitMetrics> cache_;
    std::size_t evaluations_ = 0;
    std::size_t hits_ = 0;
};

struct OptimizeResult {
    std::vector<ParetoPoint> front;
    std::vector<double> hypervolume; // rank-0 hypervolume after each generation (index 0: initial)
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
    std::size_t clamped = 0;
};

[[nodiscard]] inline double front_hypervolume(std::span<nsga2::Individual const> pop, double reference_power)
{
    std::vector<std::pair<double, double>> pts;
    for (auto const& ind : pop) {
        if (ind.rank == 0) {
            pts.emplace_back(ind.f[0], ind.f[1]);
        }
    }
    return nsga2::hypervolume_2d(std::move(pts), { 0.0, reference_power });
}

/// Bi-objective gait search: minimize (-v_avg, P_avg) over the gait box with
/// the configured robustness margin.
[[nodiscard]] inline OptimizeResult optimize_gaits(OptimizerConfig const& cfg, GaitEvaluator& evaluator)
{
    cfg.bounds.validate();
    cfg.margin.validate();
    nsga2::Box const box { { cfg.bounds.s_min, cfg.bounds.f_min }, { cfg.bounds.s_max, cfg.bounds.f_max } };

    std::size_t const evals_before = evaluator.evaluations();
    std::size_t const hits_before = evaluator.cache_hits();
    std::map<std::pair<double, double>, GaitMetrics> seen;

    OptimizeResult out;
    auto evaluate = [&](std::span<nsga2::Individual> batch) {
        std::vector<GaitParams> gaits;
        gaits.reserve(batch.size());
        for (auto const& ind : batch) {
            gaits.push_back({ ind.x[0], ind.x[1] });
        }
        auto const metrics = evaluator.evaluate_batch(gaits, cfg.margin);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            batch[i].f = { -metrics[i].v_avg, metrics[i].p_avg };
            seen.emplace(std::pair { batch[i].x[0], batch[i].x[1] }, metrics[i]);
        }
    };
    auto observe = [&](std::size_t, std::span<nsga2::Individual const> pop) {
        out.hypervolume.push_back(front_hypervolume(pop, cfg.hv_reference_power));
    };
    auto ga = cfg.ga;
    ga.hv_reference = std::pair { 0.0, cfg.hv_reference_power };
    auto const res = nsga2::optimize(ga, box, evaluate, observe);

    for (auto const& ind : res.front) {
        ParetoPoint p;
        p.gait = { ind.x[0], ind.x[1] };
        p.metrics = seen.at({ ind.x[0], ind.x[1] });
        p.rank = ind.rank;
        p.crowding = ind.crowding;
        out.front.push_back(p);
    }
    std::stable_sort(out.front.begin(), out.front.end(), [](auto const& a, auto const& b) {
        return std::tie(a.metrics.v_avg, a.metrics.p_avg) < std::tie(b.metrics.v_avg, b.metrics.p_avg);
    });
    out.evaluations = evaluator.evaluations() - evals_before;
    out.cache_hits = evaluator.cache_hits() - hits_before;
    out.clamped = res.clamped;
    return out;
}

[[nodiscard]] inline std::vector<ParetoPoint> nsga2_optimize(OptimizerConfig const& cfg, Models const& models)
{
    GaitEvaluator evaluator(models, cfg.sim, cfg.jobs);
    return optimize_gaits(cfg, evaluator).front;
}

// --- price of robustness ----------------------------------------------------

enum class CotKind { WeightNormalized, PerMeter };

struct MarginScanEntry {
    double delta_m = 0.0;
    double optimal_cot = std::numeric_limits<double>::infinity();
    std::optional<GaitParams> argmin;
    std::size_t front_size = 0;
};

struct MarginScanResult {
    std::vector<MarginScanEntry> entries;
    std::optional<double> cliff;
    std::vector<std::string> warnings;
};

struct MarginScanOptions {
    double jump_factor = 2.0;
    CotKind cot_kind = CotKind::WeightNormalized;
};

/// Builds the grid MIN, MIN+STEP, ... up to MAX (inclusive within STEP/1000).
[[nodiscard]] inline std::vector<double> margin_grid(double lo, double step, double hi)
{
    if (!(step > 0.0) || !(hi >= lo) || !(lo >= 0.0)) {
        throw ParameterError(fmt::format("margin grid {}:{}:{} must start at a nonnegative value and increase", lo, step, hi));
    }
    std::vector<double> g;
    auto const n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-3));
    for (std::size_t i = 0; i <= n; ++i) {
        g.push_back(lo + static_cast<double>(i) * step);
    }
    return g;
}

/// Largest grid value before the first jump of the optimal-COT curve by more
/// than `factor` between neighbours (a finite-to-infinite step counts).
[[nodiscard]] inline std::optional<std::size_t> detect_cliff(std::span<double const> cot, double factor)
{
    for (std::size_t k = 0; k + 1 < cot.size(); ++k) {
        if (!std::isfinite(cot[k])) {
            continue;
        }
        if (!std::isfinite(cot[k + 1]) || cot[k + 1] > factor * cot[k]) {
            return k;
        }
    }
    return std::nullopt;
}

[[nodiscard]] inline MarginScanResult margin_scan(std::span<double const> grid, OptimizerConfig cfg,
    GaitEvaluator& evaluator, MarginScanOptions const& opt = {})
{
    if (grid.empty()) {
        throw ParameterError("margin grid is empty");
    }
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (!(grid[k + 1] > grid[k])) {
            throw ParameterError("margin grid must be strictly increasing");
        }
    }
    MarginScanResult res;
    std::vector<double> curve;
    for (double dm : grid) {
        cfg.margin = MarginSetting { dm };
        auto const opt_res = optimize_gaits(cfg, evaluator);
        MarginScanEntry e;
        e.delta_m = dm;
        e.front_size = opt_res.front.size();
        for (auto const& p : opt_res.front) {
            double const c = opt.cot_kind == CotKind::WeightNormalized ? p.metrics.cot : p.metrics.energy_per_meter;
            if (std::isfinite(c) && c < e.optimal_cot) {
                e.optimal_cot = c;
                e.argmin = p.gait;
            }
        }
        curve.push_back(e.optimal_cot);
        res.entries.push_back(e);
    }

    if (auto k = detect_cliff(curve, opt.jump_factor)) {
        res.cliff = grid[*k];
    } else if (std::none_of(curve.begin(), curve.end(), [](double c) { return std::isfinite(c); })) {
        res.warnings.push_back("no cliff detected: optimal cost of transport is infinite over the whole grid");
    } else {
        res.warnings.push_back(fmt::format("no cliff detected: no jump larger than x{} in the optimal cost of transport",
            opt.jump_factor));
    }

    // Switching can only become rarer as the threshold grows; audit this on
    // the nominal optimum.
    if (res.entries.front().argmin) {
        auto const gait = *res.entries.front().argmin;
        std::size_t prev = std::numeric_limits<std::size_t>::max();
        for (double dm : grid) {
            auto const tr = simulate(gait, evaluator.models().robot, evaluator.models().actuation, MarginSetting { dm },
                evaluator.sim().n_cycles, evaluator.sim().dt);
            if (tr.switch_events.size() > prev) {
                res.warnings.push_back(fmt::format("switch count increased at delta_m={} for gait S={}, f={}", dm,
                    gait.stroke_s, gait.freq_f));
            }
            prev = tr.switch_events.size();
        }
    }
    return res;
}

// --- representative points --------------------------------------------------

struct RepresentativePoints {
    ParetoPoint min_power;
    ParetoPoint cruising;
    ParetoPoint max_speed;
};

/// Minimum-power, cruising (lowest cost of transport, ties broken toward the
/// median speed) and maximum-speed points of a front.
[[nodiscard]] inline RepresentativePoints select_representative_points(std::span<ParetoPoint const> front)
{
    if (front.empty()) {
        throw DataError("cannot select representative points from an empty front");
    }
    auto const min_power = std::min_element(front.begin(), front.end(), [](auto const& a, auto const& b) {
        return a.metrics.p_avg < b.metrics.p_avg || (a.metrics.p_avg == b.metrics.p_avg && a.metrics.v_avg > b.metrics.v_avg);
    });
    auto const max_speed = std::min_element(front.begin(), front.end(), [](auto const& a, auto const& b) {
        return a.metrics.v_avg > b.metrics.v_avg || (a.metrics.v_avg == b.metrics.v_avg && a.metrics.p_avg < b.metrics.p_avg);
    });

    std::vector<double> speeds;
    for (auto const& p : front) {
        speeds.push_back(p.metrics.v_avg);
    }
    std::sort(speeds.begin(), speeds.end());
    std::size_t const m = speeds.size();
    double const median = m % 2 == 1 ? speeds[m / 2] : 0.5 * (speeds[m / 2 - 1] + speeds[m / 2]);

    auto const cruising = std::min_element(front.begin(), front.end(), [&](auto const& a, auto const& b) {
        if (a.metrics.cot != b.metrics.cot) {
            return a.metrics.cot < b.metrics.cot;
        }
        return std::abs(a.metrics.v_avg - median) < std::abs(b.metrics.v_avg - median);
    });
    return { *min_power, *cruising, *max_speed };
}

} // namespace wormgait

#endif
