#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "shapeopt/types.hpp"

namespace shapeopt::geometry {

using Face = std::array<int, 3>;

/// Indexed triangle surface. Faces wind counter-clockwise seen from outside.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    [[nodiscard]] bool empty() const { return faces.empty(); }
    [[nodiscard]] Vec3 face_vertex(std::size_t f, int corner) const { return vertices[faces[f][corner]]; }
};

struct WatertightReport {
    bool is_watertight = false;
    int flipped_edge_count = 0;   // edges whose two faces traverse them in the same direction
    int boundary_edge_count = 0;  // edges used by exactly one face
    int nonmanifold_edge_count = 0;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Throws DataError when a face references a missing vertex.
void check_indices(const TriMesh& mesh);

[[nodiscard]] WatertightReport validate_watertight(const TriMesh& mesh);

/// Counts faces whose area is below `tolerance`.
[[nodiscard]] std::size_t count_degenerate_faces(const TriMesh& mesh, double tolerance = 1e-12);

/// Moves the bounding-box center to the origin and scales so the farthest vertex sits at `target_radius`.
[[nodiscard]] TriMesh center_and_normalize(const TriMesh& mesh, double target_radius = 0.9);

/// V - E + F over the indexed topology.
[[nodiscard]] long euler_characteristic(const TriMesh& mesh);

[[nodiscard]] double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
[[nodiscard]] double surface_area(const TriMesh& mesh);

/// Signed volume from the divergence theorem; positive for outward winding.
[[nodiscard]] double mesh_volume(const TriMesh& mesh);

[[nodiscard]] TriMesh flip_orientation(TriMesh mesh);
[[nodiscard]] TriMesh scale_mesh(TriMesh mesh, double factor);

} // namespace shapeopt::geometry
