#pragma once

#include <array>
#include <vector>

namespace shapeopt::evolution {

/// Area dominated by `points` and bounded by `reference` (minimization). Points that do not
/// strictly dominate the reference contribute nothing.
[[nodiscard]] double hypervolume_2d(const std::vector<std::vector<double>>& points, const std::array<double, 2>& reference);

} // namespace shapeopt::evolution
