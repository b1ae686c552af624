#pragma once

#include <memory>
#include <span>
#include <vector>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

/// Squared distance from `p` to the closed triangle (a, b, c).
[[nodiscard]] double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Generalized winding number of a closed mesh around `p` (1 inside, 0 outside).
[[nodiscard]] double winding_number(const TriMesh& mesh, const Vec3& p);

/// Signed-distance queries against a watertight mesh, accelerated by an AABB tree.
///
/// The unsigned part is the exact minimum of point_triangle_distance_sq over all faces;
/// the tree only prunes boxes that cannot hold a closer triangle. Inside/outside is decided
/// by ray parity along three fixed directions; when the three parities disagree the
/// generalized winding number decides instead.
class MeshDistanceField {
public:
    /// Throws DataError if the mesh is not watertight.
    explicit MeshDistanceField(TriMesh mesh);
    ~MeshDistanceField();
    MeshDistanceField(MeshDistanceField&&) noexcept;
    MeshDistanceField& operator=(MeshDistanceField&&) noexcept;

    [[nodiscard]] double unsigned_distance(const Vec3& p) const;
    [[nodiscard]] bool is_inside(const Vec3& p) const;
    [[nodiscard]] double signed_distance(const Vec3& p) const;

    /// Evaluates many queries in parallel; output order matches input order.
    [[nodiscard]] std::vector<double> signed_distances(std::span<const Vec3> points) const;

    [[nodiscard]] const TriMesh& mesh() const { return mesh_; }

private:
    struct Tree;
    int ray_parity(const Vec3& origin, const Vec3& direction) const;

    TriMesh mesh_;
    std::unique_ptr<Tree> tree_;
};

/// One-off query; builds the acceleration structure each call.
[[nodiscard]] double signed_distance(const TriMesh& mesh, const Vec3& query);

} // namespace shapeopt::geometry
