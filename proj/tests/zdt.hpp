#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "shapeopt/evolution/hypervolume.hpp"
#include "shapeopt/evolution/nsga2.hpp"

namespace testing {

using shapeopt::evolution::Evaluation;
using shapeopt::evolution::Individual;
using shapeopt::evolution::NsgaResult;

inline Evaluation zdt1(const Eigen::VectorXd& x)
{
    const double f1 = x(0);
    double sum = 0.0;
    for (Eigen::Index i = 1; i < x.size(); ++i) sum += x(i);
    const double g = 1.0 + 9.0 * sum / static_cast<double>(x.size() - 1);
    return {true, {f1, g * (1.0 - std::sqrt(f1 / g))}};
}

inline bool weakly_better(const std::vector<double>& a, const std::vector<double>& b)
{
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
        strict = strict || a[k] < b[k];
    }
    return strict;
}

/// Peels fronts by repeatedly collecting every point no remaining point dominates.
inline std::vector<std::vector<int>> brute_force_fronts(const std::vector<std::vector<double>>& objs)
{
    std::vector<int> remaining(objs.size());
    for (std::size_t i = 0; i < objs.size(); ++i) remaining[i] = static_cast<int>(i);
    std::vector<std::vector<int>> fronts;
    while (!remaining.empty()) {
        std::vector<int> front, rest;
        for (int i : remaining) {
            bool dominated = false;
            for (int j : remaining) dominated = dominated || weakly_better(objs[j], objs[i]);
            (dominated ? rest : front).push_back(i);
        }
        fronts.push_back(front);
        remaining = rest;
    }
    return fronts;
}

/// Area of the union of boxes [p, ref] over a compressed coordinate grid.
inline double union_area(const std::vector<std::vector<double>>& pts, const std::array<double, 2>& ref)
{
    std::set<double> xs{ref[0]}, ys{ref[1]};
    for (const auto& p : pts) {
        if (p[0] < ref[0] && p[1] < ref[1]) {
            xs.insert(p[0]);
            ys.insert(p[1]);
        }
    }
    const std::vector<double> x(xs.begin(), xs.end()), y(ys.begin(), ys.end());
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        for (std::size_t j = 0; j + 1 < y.size(); ++j) {
            bool covered = false;
            for (const auto& p : pts) covered = covered || (p[0] <= x[i] && p[1] <= y[j]);
            if (covered) area += (x[i + 1] - x[i]) * (y[j + 1] - y[j]);
        }
    }
    return area;
}

inline std::vector<std::vector<double>> first_front(const std::vector<Individual>& pop)
{
    std::vector<std::vector<double>> out;
    for (const auto& ind : pop) {
        if (ind.feasible && ind.rank == 0) out.push_back(ind.objectives);
    }
    return out;
}

inline double front_hypervolume(const std::vector<Individual>& pop)
{
    return shapeopt::evolution::hypervolume_2d(first_front(pop), {1.1, 1.1});
}

/// No member of a generation's first front is dominated by a member of the previous one.
inline bool elitism_holds(const NsgaResult& r)
{
    for (std::size_t g = 1; g < r.generations.size(); ++g) {
        const auto before = first_front(r.generations[g - 1]);
        for (const auto& now : first_front(r.generations[g])) {
            for (const auto& old : before) {
                if (weakly_better(old, now)) return false;
            }
        }
    }
    return true;
}

} // namespace testing
