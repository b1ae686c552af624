#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "shapeopt/latent/latent.hpp"
#include "shapeopt/types.hpp"

namespace shapeopt::evolution {

/// All objectives are minimized.
struct Individual {
    Eigen::VectorXd genome;
    std::vector<double> objectives;
    int rank = -1;         // 0 = first front
    double crowding = 0.0; // +inf at front extremes
    bool feasible = false;
    bool evaluated = false;
};

struct GaConfig {
    int population_size = 10;
    int generations = 20;               // populations produced, including the initial one
    double crossover_probability = 0.9;
    double mutation_probability = -1.0; // per gene; negative means 1 / genome length
    double eta_c = 15.0;
    double eta_m = 20.0;
    std::uint64_t seed = 0;
    bool parallel_evaluation = true;

    // optional stop when the two-objective hypervolume of the first front stalls
    bool hv_early_stop = false;
    int hv_patience = 5;
    double hv_tolerance = 1e-12;
    std::vector<double> hv_reference;

    void validate() const;
    [[nodiscard]] double mutation_probability_for(Eigen::Index genome_length) const;
};

/// a <= b everywhere and a < b somewhere.
[[nodiscard]] bool dominates(std::span<const double> a, std::span<const double> b);

/// Fronts of plain objective vectors, each front in ascending index order.
[[nodiscard]] std::vector<std::vector<int>> nondominated_fronts(const std::vector<std::vector<double>>& objectives);

/// Constrained sort: fronts over the feasible individuals, then one trailing front holding every
/// infeasible one. Writes `rank`. Throws ConfigError if any individual is unevaluated or a
/// feasible one has non-finite objectives.
[[nodiscard]] std::vector<std::vector<int>> fast_nondominated_sort(std::vector<Individual>& pop);

/// Per-member crowding distance of one front; zero-range objectives contribute nothing.
[[nodiscard]] std::vector<double> crowding_distance(const std::vector<std::vector<double>>& front);

/// Sorts `pop`, then writes rank and crowding for every individual.
std::vector<std::vector<int>> rank_and_crowd(std::vector<Individual>& pop);

/// Binary tournament between two distinct members: lower rank, then larger crowding, then a coin flip.
[[nodiscard]] int tournament_select(const std::vector<Individual>& pop, Rng& rng);

/// SBX spread factor for a uniform draw u in [0, 1).
[[nodiscard]] double sbx_spread_factor(double u, double eta);

/// Children of one gene pair for spread factor beta; c1 + c2 == p1 + p2.
[[nodiscard]] std::pair<double, double> sbx_children(double p1, double p2, double beta);

/// With probability p_c every gene is recombined by SBX and the two child values are exchanged
/// with probability 1/2; otherwise the children copy the parents. Children are clamped into `bounds`.
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                                                        const latent::SearchBounds& bounds, double eta_c,
                                                                        double p_c, Rng& rng);

/// Bounded polynomial mutation of one gene for a uniform draw u in [0, 1).
[[nodiscard]] double polynomial_mutation_gene(double y, double lower, double upper, double u, double eta);

/// Each gene mutates with probability p_m; the result stays within bounds.
[[nodiscard]] Eigen::VectorXd polynomial_mutation(const Eigen::VectorXd& genome, const latent::SearchBounds& bounds,
                                                  double eta_m, double p_m, Rng& rng);

struct Evaluation {
    bool feasible = false;
    std::vector<double> objectives;  // minimization values; empty when infeasible
};

/// Must be a pure function of the genome; it may be called concurrently.
using Evaluator = std::function<Evaluation(const Eigen::VectorXd&)>;

struct NsgaResult {
    std::vector<std::vector<Individual>> generations;  // population after each generation, ranked and crowded
    std::vector<Individual> final_front;               // feasible rank-0 members of the last population
    std::vector<Individual> archive_front;             // non-dominated among every feasible design evaluated
    std::size_t evaluations = 0;
    std::size_t cache_hits = 0;
    bool stopped_early = false;
};

/// NSGA-II with (mu + lambda) survival. The initial population takes `seeds` first (clamped
/// into bounds) and fills the rest uniformly inside `bounds`. Evaluations are cached by exact
/// genome. Throws DataError if no member of the initial population is feasible.
[[nodiscard]] NsgaResult run_nsga2(const Evaluator& evaluate, const latent::SearchBounds& bounds,
                                   const std::vector<Eigen::VectorXd>& seeds, const GaConfig& cfg);

} // namespace shapeopt::evolution
