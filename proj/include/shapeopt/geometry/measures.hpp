#pragma once

#include <vector>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

/// Occupancy of the mesh projected along an axis, rasterized over [-1,1]^2 at pixel centres.
struct Silhouette {
    Axis axis = Axis::Z;
    int resolution = 0;
    std::vector<unsigned char> occupied;  // row-major, resolution^2

    [[nodiscard]] double pixel_size() const { return 2.0 / resolution; }
    [[nodiscard]] double pixel_center(int i) const { return -1.0 + (i + 0.5) * pixel_size(); }
    [[nodiscard]] double area() const;
    /// Polar second moment of area about the projection axis through the origin.
    [[nodiscard]] double second_moment() const;
};

[[nodiscard]] Silhouette rasterize_silhouette(const TriMesh& mesh, Axis axis, int resolution);

[[nodiscard]] double frontal_projected_area(const TriMesh& mesh, Axis axis, int resolution);

} // namespace shapeopt::geometry
