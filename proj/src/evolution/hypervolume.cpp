#include "shapeopt/evolution/hypervolume.hpp"

#include <algorithm>
#include <utility>

#include "shapeopt/error.hpp"

namespace shapeopt::evolution {

double hypervolume_2d(const std::vector<std::vector<double>>& points, const std::array<double, 2>& reference)
{
    std::vector<std::pair<double, double>> inside;
    for (const auto& p : points) {
        if (p.size() != 2) throw ConfigError("hypervolume_2d expects two objectives");
        if (p[0] < reference[0] && p[1] < reference[1]) inside.emplace_back(p[0], p[1]);
    }
    std::sort(inside.begin(), inside.end());
    double area = 0.0;
    double best_f2 = reference[1];
    for (const auto& [f1, f2] : inside) {
        if (f2 < best_f2) {
            area += (reference[0] - f1) * (best_f2 - f2);
            best_f2 = f2;
        }
    }
    return area;
}

} // namespace shapeopt::evolution
