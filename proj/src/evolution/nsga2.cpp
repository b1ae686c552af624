#include "shapeopt/evolution/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "shapeopt/error.hpp"
#include "shapeopt/evolution/hypervolume.hpp"

namespace shapeopt::evolution {

void GaConfig::validate() const
{
    if (population_size < 4 || population_size % 2 != 0) {
        throw ConfigError("population_size must be even and >= 4, got " + std::to_string(population_size));
    }
    if (generations < 1) throw ConfigError("generations must be >= 1");
    if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0)) throw ConfigError("crossover probability must lie in [0,1]");
    if (mutation_probability > 1.0) throw ConfigError("mutation probability must lie in [0,1]");
    if (!(eta_c > 0.0) || !(eta_m > 0.0)) throw ConfigError("distribution indices must be positive");
    if (hv_early_stop && (hv_reference.size() != 2 || hv_patience < 1)) {
        throw ConfigError("hypervolume early stop needs a two-entry reference point and patience >= 1");
    }
}

double GaConfig::mutation_probability_for(Eigen::Index genome_length) const
{
    return mutation_probability < 0.0 ? 1.0 / static_cast<double>(genome_length) : mutation_probability;
}

bool dominates(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) throw ConfigError("cannot compare objective vectors of different length");
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

std::vector<std::vector<int>> nondominated_fronts(const std::vector<std::vector<double>>& objectives)
{
    // Deb's bookkeeping: domination counts plus the list each point dominates.
    const int n = static_cast<int>(objectives.size());
    std::vector<std::vector<int>> dominated(static_cast<std::size_t>(n));
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> fronts(1);
    for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
            if (dominates(objectives[p], objectives[q])) {
                dominated[p].push_back(q);
                ++count[q];
            } else if (dominates(objectives[q], objectives[p])) {
                dominated[q].push_back(p);
                ++count[p];
            }
        }
    }
    for (int p = 0; p < n; ++p) {
        if (count[p] == 0) fronts[0].push_back(p);
    }
    while (!fronts.back().empty()) {
        std::vector<int> next;
        for (int p : fronts.back()) {
            for (int q : dominated[p]) {
                if (--count[q] == 0) next.push_back(q);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

std::vector<std::vector<int>> fast_nondominated_sort(std::vector<Individual>& pop)
{
    std::vector<int> feasible_ids;
    std::vector<int> infeasible_ids;
    std::vector<std::vector<double>> objectives;
    for (int i = 0; i < static_cast<int>(pop.size()); ++i) {
        const Individual& ind = pop[i];
        if (!ind.evaluated) throw ConfigError("individual " + std::to_string(i) + " has not been evaluated");
        if (!ind.feasible) {
            infeasible_ids.push_back(i);
            continue;
        }
        for (double v : ind.objectives) {
            if (!std::isfinite(v)) throw ConfigError("feasible individual " + std::to_string(i) + " has a non-finite objective");
        }
        feasible_ids.push_back(i);
        objectives.push_back(ind.objectives);
    }

    std::vector<std::vector<int>> fronts;
    for (const auto& local : nondominated_fronts(objectives)) {
        std::vector<int> front;
        for (int idx : local) front.push_back(feasible_ids[static_cast<std::size_t>(idx)]);
        fronts.push_back(std::move(front));
    }
    if (!infeasible_ids.empty()) fronts.push_back(infeasible_ids);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        for (int i : fronts[r]) pop[static_cast<std::size_t>(i)].rank = static_cast<int>(r);
    }
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<std::vector<double>>& front)
{
    const std::size_t n = front.size();
    std::vector<double> distance(n, 0.0);
    if (n == 0) return distance;
    const double inf = std::numeric_limits<double>::infinity();
    if (n <= 2) {
        std::fill(distance.begin(), distance.end(), inf);
        return distance;
    }
    const std::size_t m = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t obj = 0; obj < m; ++obj) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][obj] < front[b][obj]; });
        const double lo = front[order.front()][obj];
        const double hi = front[order.back()][obj];
        distance[order.front()] = inf;
        distance[order.back()] = inf;
        const double range = hi - lo;
        if (!(range > 0.0)) continue;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (distance[order[i]] == inf) continue;
            distance[order[i]] += (front[order[i + 1]][obj] - front[order[i - 1]][obj]) / range;
        }
    }
    return distance;
}

std::vector<std::vector<int>> rank_and_crowd(std::vector<Individual>& pop)
{
    auto fronts = fast_nondominated_sort(pop);
    for (const auto& front : fronts) {
        if (!pop[static_cast<std::size_t>(front.front())].feasible) {
            for (int i : front) pop[static_cast<std::size_t>(i)].crowding = 0.0;
            continue;
        }
        std::vector<std::vector<double>> values;
        for (int i : front) values.push_back(pop[static_cast<std::size_t>(i)].objectives);
        const auto d = crowding_distance(values);
        for (std::size_t j = 0; j < front.size(); ++j) pop[static_cast<std::size_t>(front[j])].crowding = d[j];
    }
    return fronts;
}

int tournament_select(const std::vector<Individual>& pop, Rng& rng)
{
    if (pop.size() < 2) throw ConfigError("tournament needs at least two individuals");
    std::uniform_int_distribution<int> pick(0, static_cast<int>(pop.size()) - 1);
    const int a = pick(rng);
    int b = pick(rng);
    while (b == a) b = pick(rng);
    const Individual& x = pop[static_cast<std::size_t>(a)];
    const Individual& y = pop[static_cast<std::size_t>(b)];
    if (x.rank != y.rank) return x.rank < y.rank ? a : b;
    if (x.crowding != y.crowding) return x.crowding > y.crowding ? a : b;
    return std::bernoulli_distribution(0.5)(rng) ? a : b;
}

double sbx_spread_factor(double u, double eta)
{
    if (u <= 0.5) return std::pow(2.0 * u, 1.0 / (eta + 1.0));
    return std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
}

std::pair<double, double> sbx_children(double p1, double p2, double beta)
{
    const double mean = 0.5 * (p1 + p2);
    const double half_gap = 0.5 * (p2 - p1);
    return {mean - beta * half_gap, mean + beta * half_gap};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                                          const latent::SearchBounds& bounds, double eta_c, double p_c, Rng& rng)
{
    if (p1.size() != p2.size() || p1.size() != bounds.dim()) throw ConfigError("crossover genome sizes differ");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd c1 = p1;
    Eigen::VectorXd c2 = p2;
    if (unit(rng) >= p_c) return {c1, c2};
    for (Eigen::Index j = 0; j < p1.size(); ++j) {
        const double u = unit(rng);
        const bool swap = unit(rng) < 0.5;
        if (p1(j) == p2(j)) continue;
        auto [a, b] = sbx_children(p1(j), p2(j), sbx_spread_factor(u, eta_c));
        if (swap) std::swap(a, b);
        c1(j) = a;
        c2(j) = b;
    }
    return {bounds.clamp(c1), bounds.clamp(c2)};
}

double polynomial_mutation_gene(double y, double lower, double upper, double u, double eta)
{
    const double range = upper - lower;
    if (!(range > 0.0)) return y;
    const double d1 = (y - lower) / range;
    const double d2 = (upper - y) / range;
    const double power = 1.0 / (eta + 1.0);
    double dq;
    if (u < 0.5) {
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(val, power) - 1.0;
    } else {
        const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(val, power);
    }
    return std::clamp(y + dq * range, lower, upper);
}

Eigen::VectorXd polynomial_mutation(const Eigen::VectorXd& genome, const latent::SearchBounds& bounds, double eta_m, double p_m,
                                    Rng& rng)
{
    if (genome.size() != bounds.dim()) throw ConfigError("mutation genome size differs from bounds");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd out = genome;
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        if (unit(rng) >= p_m) continue;
        out(j) = polynomial_mutation_gene(out(j), bounds.lower(j), bounds.upper(j), unit(rng), eta_m);
    }
    return out;
}

namespace {

using GenomeKey = std::vector<double>;

GenomeKey key_of(const Eigen::VectorXd& g)
{
    return GenomeKey(g.data(), g.data() + g.size());
}

class CachedEvaluator {
public:
    CachedEvaluator(const Evaluator& evaluate, bool parallel) : evaluate_(evaluate), parallel_(parallel) {}

    void evaluate(std::vector<Individual>& individuals, NsgaResult& stats)
    {
        // unique uncached genomes in first-appearance order
        std::vector<GenomeKey> pending;
        std::map<GenomeKey, bool> queued;
        for (const Individual& ind : individuals) {
            GenomeKey key = key_of(ind.genome);
            if (cache_.count(key) || queued.count(key)) {
                ++stats.cache_hits;
                continue;
            }
            queued[key] = true;
            pending.push_back(std::move(key));
        }

        std::vector<Evaluation> results(pending.size());
        std::exception_ptr failure;
        const long n = static_cast<long>(pending.size());
#pragma omp parallel for schedule(dynamic, 1) if (parallel_)
        for (long i = 0; i < n; ++i) {
            try {
                const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(pending[i].data(), static_cast<Eigen::Index>(pending[i].size()));
                results[static_cast<std::size_t>(i)] = evaluate_(g);
            } catch (...) {
#pragma omp critical(nsga_eval_failure)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);

        for (std::size_t i = 0; i < pending.size(); ++i) {
            Evaluation& r = results[i];
            if (r.feasible) {
                for (double v : r.objectives) {
                    if (!std::isfinite(v)) r.feasible = false;
                }
            }
            if (!r.feasible) r.objectives.clear();
            order_.push_back(pending[i]);
            cache_.emplace(pending[i], std::move(r));
        }
        stats.evaluations += pending.size();

        for (Individual& ind : individuals) {
            const Evaluation& r = cache_.at(key_of(ind.genome));
            ind.feasible = r.feasible;
            ind.objectives = r.objectives;
            ind.evaluated = true;
        }
    }

    /// Every distinct feasible design seen so far, in evaluation order.
    [[nodiscard]] std::vector<Individual> feasible_history() const
    {
        std::vector<Individual> out;
        for (const GenomeKey& key : order_) {
            const Evaluation& r = cache_.at(key);
            if (!r.feasible) continue;
            Individual ind;
            ind.genome = Eigen::Map<const Eigen::VectorXd>(key.data(), static_cast<Eigen::Index>(key.size()));
            ind.objectives = r.objectives;
            ind.feasible = true;
            ind.evaluated = true;
            out.push_back(std::move(ind));
        }
        return out;
    }

private:
    const Evaluator& evaluate_;
    bool parallel_;
    std::map<GenomeKey, Evaluation> cache_;
    std::vector<GenomeKey> order_;
};

std::vector<Individual> first_front(const std::vector<Individual>& pop)
{
    std::vector<Individual> out;
    for (const Individual& ind : pop) {
        if (ind.feasible && ind.rank == 0) out.push_back(ind);
    }
    return out;
}

std::vector<Individual> survivors(std::vector<Individual> merged, std::size_t count)
{
    const auto fronts = rank_and_crowd(merged);
    std::vector<Individual> next;
    next.reserve(count);
    for (const auto& front : fronts) {
        if (next.size() + front.size() <= count) {
            for (int i : front) next.push_back(merged[static_cast<std::size_t>(i)]);
            continue;
        }
        std::vector<int> ordered = front;
        std::stable_sort(ordered.begin(), ordered.end(), [&](int a, int b) {
            return merged[static_cast<std::size_t>(a)].crowding > merged[static_cast<std::size_t>(b)].crowding;
        });
        for (std::size_t j = 0; next.size() < count; ++j) next.push_back(merged[static_cast<std::size_t>(ordered[j])]);
        break;
    }
    rank_and_crowd(next);
    return next;
}

double front_hypervolume(const std::vector<Individual>& pop, const std::vector<double>& reference)
{
    std::vector<std::vector<double>> pts;
    for (const Individual& ind : first_front(pop)) pts.push_back(ind.objectives);
    return hypervolume_2d(pts, {reference[0], reference[1]});
}

} // namespace

NsgaResult run_nsga2(const Evaluator& evaluate, const latent::SearchBounds& bounds, const std::vector<Eigen::VectorXd>& seeds,
                     const GaConfig& cfg)
{
    cfg.validate();
    bounds.validate();
    const Eigen::Index dim = bounds.dim();
    const auto n = static_cast<std::size_t>(cfg.population_size);
    const double p_m = cfg.mutation_probability_for(dim);

    Rng rng(cfg.seed);
    CachedEvaluator evaluator(evaluate, cfg.parallel_evaluation);
    NsgaResult result;

    std::vector<Individual> pop;
    for (const Eigen::VectorXd& s : seeds) {
        if (pop.size() == n) break;
        if (s.size() != dim) throw ConfigError("seed genome has the wrong dimension");
        Individual ind;
        ind.genome = bounds.clamp(s);
        pop.push_back(std::move(ind));
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (pop.size() < n) {
        Individual ind;
        ind.genome.resize(dim);
        for (Eigen::Index j = 0; j < dim; ++j) ind.genome(j) = bounds.lower(j) + unit(rng) * (bounds.upper(j) - bounds.lower(j));
        pop.push_back(std::move(ind));
    }

    evaluator.evaluate(pop, result);
    if (std::none_of(pop.begin(), pop.end(), [](const Individual& i) { return i.feasible; })) {
        throw DataError("every individual of the initial population is infeasible (no design could be evaluated)");
    }
    rank_and_crowd(pop);
    result.generations.push_back(pop);

    double best_hv = cfg.hv_early_stop ? front_hypervolume(pop, cfg.hv_reference) : 0.0;
    int stalled = 0;

    for (int gen = 1; gen < cfg.generations; ++gen) {
        std::vector<Individual> offspring;
        offspring.reserve(n);
        while (offspring.size() < n) {
            const Individual& a = pop[static_cast<std::size_t>(tournament_select(pop, rng))];
            const Individual& b = pop[static_cast<std::size_t>(tournament_select(pop, rng))];
            auto [g1, g2] = sbx_crossover(a.genome, b.genome, bounds, cfg.eta_c, cfg.crossover_probability, rng);
            for (Eigen::VectorXd* g : {&g1, &g2}) {
                Individual child;
                child.genome = polynomial_mutation(*g, bounds, cfg.eta_m, p_m, rng);
                offspring.push_back(std::move(child));
            }
        }
        evaluator.evaluate(offspring, result);

        std::vector<Individual> merged = pop;
        merged.insert(merged.end(), offspring.begin(), offspring.end());
        pop = survivors(std::move(merged), n);
        result.generations.push_back(pop);

        if (cfg.hv_early_stop) {
            const double hv = front_hypervolume(pop, cfg.hv_reference);
            if (hv > best_hv + cfg.hv_tolerance) {
                best_hv = hv;
                stalled = 0;
            } else if (++stalled >= cfg.hv_patience) {
                result.stopped_early = true;
                break;
            }
        }
    }

    result.final_front = first_front(pop);
    std::vector<Individual> history = evaluator.feasible_history();
    rank_and_crowd(history);
    result.archive_front = first_front(history);
    return result;
}

} // namespace shapeopt::evolution
