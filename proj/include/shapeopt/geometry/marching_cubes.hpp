#pragma once

#include <functional>
#include <vector>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

/// Scalar samples on a resolution^3 lattice; x varies fastest.
struct ScalarGrid {
    int resolution = 0;
    Vec3 origin = Vec3::Constant(-1.0);
    double spacing = 0.0;
    std::vector<double> values;

    /// Lattice spanning [-1,1]^3 with `resolution` points per axis.
    [[nodiscard]] static ScalarGrid unit_domain(int resolution);

    [[nodiscard]] std::size_t index(int i, int j, int k) const
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(resolution) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(resolution) * k);
    }
    [[nodiscard]] Vec3 position(int i, int j, int k) const
    {
        return origin + spacing * Vec3(i, j, k);
    }
    [[nodiscard]] double at(int i, int j, int k) const { return values[index(i, j, k)]; }

    void validate() const;
};

using ScalarField = std::function<double(const Vec3&)>;

/// Samples `field` at every lattice point of the [-1,1]^3 grid (parallel, order-independent).
[[nodiscard]] ScalarGrid sample_grid(const ScalarField& field, int resolution);

/// Extracts the `iso` level set. Values below iso are inside; triangles face outward.
/// Vertices are shared between neighbouring cells, so a closed iso-surface that stays
/// clear of the grid border produces a watertight mesh.
/// Throws EmptySurfaceError when no cell straddles the iso value.
[[nodiscard]] TriMesh marching_cubes(const ScalarGrid& grid, double iso = 0.0);

} // namespace shapeopt::geometry
