#ifndef WORMGAIT_NSGA2_HPP
#define WORMGAIT_NSGA2_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "wormgait/errors.hpp"

namespace wormgait::nsga2 {

struct Config {
    std::size_t population = 64;
    std::size_t generations = 60;
    double crossover_probability = 0.9;
    double crossover_index = 15.0;
    double mutation_probability = -1.0; // negative: 1 / number of variables
    double mutation_index = 20.0;
    std::uint64_t seed = 1;
    // With two objectives and a reference point, an overflowing first front
    // is truncated to the subset of maximal hypervolume instead of by
    // crowding, so the first-front hypervolume never decreases.
    std::optional<std::pair<double, double>> hv_reference;

    void validate() const
    {
        if (population < 4 || population % 2 != 0) {
            throw ParameterError(fmt::format("population must be even and at least 4 (got {})", population));
        }
        if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) {
            throw ParameterError(fmt::format("crossover probability {} outside [0, 1]", crossover_probability));
        }
        if (mutation_probability > 1.0) {
            throw ParameterError(fmt::format("mutation probability {} outside [0, 1]", mutation_probability));
        }
        if (!(crossover_index >= 0.0) || !(mutation_index >= 0.0)) {
            throw ParameterError("distribution indices must be nonnegative");
        }
    }
};

struct Individual {
    std::vector<double> x;
    std::vector<double> f; // objectives, all minimized
    std::size_t rank = 0;  // 0 is the non-dominated front
    double crowding = 0.0;
};

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    [[nodiscard]] std::size_t size() const noexcept { return lo.size(); }
};

struct Result {
    std::vector<Individual> population;
    std::vector<Individual> front;
    std::size_t evaluations = 0;
    std::size_t clamped = 0; // variation results pulled back onto the box
};

// a dominates b: no worse in every objective and strictly better in one.
[[nodiscard]] inline bool dominates(std::span<double const> a, std::span<double const> b) noexcept
{
    bool strictly = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) {
            return false;
        }
        strictly = strictly || a[k] < b[k];
    }
    return strictly;
}

/// Deb's fast non-dominated sort; assigns ranks and returns the fronts.
inline std::vector<std::vector<std::size_t>> fast_non_dominated_sort(std::span<Individual> pop)
{
    std::size_t const n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) {
                continue;
            }
            if (dominates(pop[p].f, pop[q].f)) {
                dominated[p].push_back(q);
            } else if (dominates(pop[q].f, pop[p].f)) {
                ++count[p];
            }
        }
        if (count[p] == 0) {
            pop[p].rank = 0;
            fronts[0].push_back(p);
        }
    }
    for (std::size_t i = 0; !fronts[i].empty(); ++i) {
        std::vector<std::size_t> next;
        for (auto p : fronts[i]) {
            for (auto q : dominated[p]) {
                if (--count[q] == 0) {
                    pop[q].rank = i + 1;
                    next.push_back(q);
                }
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

inline void assign_crowding(std::span<Individual> pop, std::span<std::size_t const> front)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (auto i : front) {
        pop[i].crowding = 0.0;
    }
    if (front.size() <= 2) {
        for (auto i : front) {
            pop[i].crowding = inf;
        }
        return;
    }
    std::size_t const m = pop[front[0]].f.size();
    std::vector<std::size_t> idx(front.begin(), front.end());
    for (std::size_t k = 0; k < m; ++k) {
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pop[a].f[k] < pop[b].f[k]; });
        double const lo = pop[idx.front()].f[k];
        double const hi = pop[idx.back()].f[k];
        pop[idx.front()].crowding = inf;
        pop[idx.back()].crowding = inf;
        if (!(hi > lo)) {
            continue;
        }
        for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
            pop[idx[j]].crowding += (pop[idx[j + 1]].f[k] - pop[idx[j - 1]].f[k]) / (hi - lo);
        }
    }
}

/// Area dominated by a set of bi-objective points (minimization) and bounded by
/// `ref`. Points that do not strictly dominate the reference are ignored.
[[nodiscard]] inline double hypervolume_2d(std::vector<std::pair<double, double>> pts, std::pair<double, double> ref)
{
    std::erase_if(pts, [&](auto const& p) { return !(p.first < ref.first && p.second < ref.second); });
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double ceiling = ref.second;
    for (auto const& [a, b] : pts) {
        if (b < ceiling) {
            area += (ref.first - a) * (ceiling - b);
            ceiling = b;
        }
    }
    return area;
}

namespace detail {
    using Rng = std::mt19937_64;

    inline double uniform01(Rng& rng)
    {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    }

    inline std::size_t clamp_into(std::vector<double>& x, Box const& box)
    {
        std::size_t n = 0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double const c = std::clamp(x[j], box.lo[j], box.hi[j]);
            n += (c != x[j]) ? 1 : 0;
            x[j] = c;
        }
        return n;
    }

    // crowded-comparison binary tournament
    inline std::size_t tournament(std::span<Individual const> pop, Rng& rng)
    {
        std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
        std::size_t const a = pick(rng);
        std::size_t const b = pick(rng);
        if (pop[a].rank != pop[b].rank) {
            return pop[a].rank < pop[b].rank ? a : b;
        }
        return pop[b].crowding > pop[a].crowding ? b : a;
    }

    inline void sbx(std::vector<double>& c1, std::vector<double>& c2, double index, Rng& rng)
    {
        for (std::size_t j = 0; j < c1.size(); ++j) {
            double const swap_draw = uniform01(rng);
            double const u = uniform01(rng);
            if (swap_draw > 0.5 || std::abs(c1[j] - c2[j]) < 1e-14) {
                continue;
            }
            double const beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (index + 1.0))
                                         : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (index + 1.0));
            double const p1 = c1[j];
            double const p2 = c2[j];
            c1[j] = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2);
            c2[j] = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2);
        }
    }

    inline void polynomial_mutation(std::vector<double>& x, Box const& box, double prob, double index, Rng& rng)
    {
        for (std::size_t j = 0; j < x.size(); ++j) {
            double const draw = uniform01(rng);
            double const u = uniform01(rng);
            if (draw >= prob) {
                continue;
            }
            double const delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (index + 1.0)) - 1.0
                                         : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (index + 1.0));
            x[j] += delta * (box.hi[j] - box.lo[j]);
        }
    }

    // Exact k-subset of maximal hypervolume among mutually non-dominated
    // bi-objective points, by dynamic programming over the points sorted by
    // the first objective. Points outside the reference box or duplicating
    // another point's objectives are chosen last, by crowding.
    inline std::vector<std::size_t> hypervolume_subset(std::span<Individual const> pop,
        std::span<std::size_t const> front, std::size_t k, std::pair<double, double> ref)
    {
        std::vector<std::size_t> useful;
        std::vector<std::size_t> rest;
        std::vector<std::size_t> sorted(front.begin(), front.end());
        std::stable_sort(sorted.begin(), sorted.end(), [&](auto a, auto b) { return pop[a].f < pop[b].f; });
        for (std::size_t j = 0; j < sorted.size(); ++j) {
            auto const& f = pop[sorted[j]].f;
            bool const inside = f[0] < ref.first && f[1] < ref.second;
            bool const repeat = !useful.empty() && pop[useful.back()].f == f;
            (inside && !repeat ? useful : rest).push_back(sorted[j]);
        }

        std::vector<std::size_t> chosen;
        if (useful.size() <= k) {
            chosen = useful;
        } else {
            std::size_t const m = useful.size();
            auto x = [&](std::size_t j) { return pop[useful[j]].f[0]; };
            auto y = [&](std::size_t j) { return pop[useful[j]].f[1]; };
            // g[c][j]: best area with c points chosen from j.. and j leftmost
            constexpr double none = -1.0;
            std::vector<std::vector<double>> g(k + 1, std::vector<double>(m, none));
            std::vector<std::vector<std::size_t>> next(k + 1, std::vector<std::size_t>(m, m));
            for (std::size_t j = 0; j < m; ++j) {
                g[1][j] = (ref.first - x(j)) * (ref.second - y(j));
            }
            for (std::size_t c = 2; c <= k; ++c) {
                for (std::size_t j = 0; j + c <= m; ++j) {
                    for (std::size_t l = j + 1; l + c - 1 <= m; ++l) {
                        if (g[c - 1][l] == none) {
                            continue;
                        }
                        double const v = (x(l) - x(j)) * (ref.second - y(j)) + g[c - 1][l];
                        if (v > g[c][j]) {
                            g[c][j] = v;
                            next[c][j] = l;
                        }
                    }
                }
            }
            std::size_t j = static_cast<std::size_t>(std::max_element(g[k].begin(), g[k].end()) - g[k].begin());
            for (std::size_t c = k; c >= 1; --c) {
                chosen.push_back(useful[j]);
                j = next[c][j];
            }
        }
        std::stable_sort(rest.begin(), rest.end(), [&](auto a, auto b) { return pop[a].crowding > pop[b].crowding; });
        for (std::size_t i = 0; chosen.size() < k; ++i) {
            chosen.push_back(rest[i]);
        }
        return chosen;
    }

    inline void rank_and_crowd(std::span<Individual> pop)
    {
        for (auto const& front : fast_non_dominated_sort(pop)) {
            assign_crowding(pop, front);
        }
    }
} // namespace detail

/// Elitist NSGA-II. `evaluate(std::span<Individual>)` fills `f` for every
/// individual it receives; `observe(generation, population)` is called after
/// initialization (generation 0) and after every survivor selection.
template <typename Evaluate, typename Observe>
Result optimize(Config const& cfg, Box const& box, Evaluate&& evaluate, Observe&& observe)
{
    cfg.validate();
    if (box.lo.size() != box.hi.size() || box.lo.empty()) {
        throw ParameterError("search box bounds are inconsistent");
    }
    for (std::size_t j = 0; j < box.size(); ++j) {
        if (!(box.lo[j] <= box.hi[j])) {
            throw ParameterError(fmt::format("search box dimension {} has lo > hi", j));
        }
    }
    std::size_t const n = cfg.population;
    double const pm = cfg.mutation_probability < 0.0 ? 1.0 / static_cast<double>(box.size()) : cfg.mutation_probability;
    detail::Rng rng(cfg.seed);
    Result res;

    std::vector<Individual> pop(n);
    for (auto& ind : pop) {
        ind.x.resize(box.size());
        for (std::size_t j = 0; j < box.size(); ++j) {
            ind.x[j] = box.lo[j] + detail::uniform01(rng) * (box.hi[j] - box.lo[j]);
        }
    }
    evaluate(std::span<Individual>(pop));
    res.evaluations += pop.size();
    detail::rank_and_crowd(pop);
    observe(std::size_t { 0 }, std::span<Individual const>(pop));

    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<Individual> offspring;
        offspring.reserve(n);
        while (offspring.size() < n) {
            auto c1 = pop[detail::tournament(pop, rng)];
            auto c2 = pop[detail::tournament(pop, rng)];
            if (detail::uniform01(rng) < cfg.crossover_probability) {
                detail::sbx(c1.x, c2.x, cfg.crossover_index, rng);
            }
            for (auto* c : { &c1, &c2 }) {
                detail::polynomial_mutation(c->x, box, pm, cfg.mutation_index, rng);
                res.clamped += detail::clamp_into(c->x, box);
                c->f.clear();
                offspring.push_back(std::move(*c));
            }
        }
        evaluate(std::span<Individual>(offspring));
        res.evaluations += offspring.size();

        std::vector<Individual> merged = std::move(pop);
        merged.insert(merged.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
        auto const fronts = fast_non_dominated_sort(merged);

        pop.clear();
        for (auto const& front : fronts) {
            assign_crowding(merged, front);
            if (pop.size() + front.size() <= n) {
                for (auto i : front) {
                    pop.push_back(merged[i]);
                }
                if (pop.size() == n) {
                    break;
                }
                continue;
            }
            if (pop.empty() && cfg.hv_reference && merged[front.front()].f.size() == 2) {
                for (auto i : detail::hypervolume_subset(merged, front, n, *cfg.hv_reference)) {
                    pop.push_back(merged[i]);
                }
                break;
            }
            std::vector<std::size_t> order(front.begin(), front.end());
            std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return merged[a].crowding > merged[b].crowding; });
            for (std::size_t k = 0; pop.size() < n; ++k) {
                pop.push_back(merged[order[k]]);
            }
            break;
        }
        detail::rank_and_crowd(pop);
        observe(gen, std::span<Individual const>(pop));
    }

    res.population = pop;
    for (auto const& ind : pop) {
        if (ind.rank == 0) {
            res.front.push_back(ind);
        }
    }
    return res;
}

template <typename Evaluate>
Result optimize(Config const& cfg, Box const& box, Evaluate&& evaluate)
{
    return optimize(cfg, box, std::forward<Evaluate>(evaluate), [](std::size_t, std::span<Individual const>) {});
}

} // namespace wormgait::nsga2

#endif
