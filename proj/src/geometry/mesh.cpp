#include "shapeopt/geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "shapeopt/error.hpp"

namespace shapeopt::geometry {

void check_indices(const TriMesh& mesh)
{
    const int n = static_cast<int>(mesh.vertices.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        for (int idx : mesh.faces[f]) {
            if (idx < 0 || idx >= n) {
                throw DataError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) +
                                " but the mesh has " + std::to_string(n) + " vertices");
            }
        }
    }
}

WatertightReport validate_watertight(const TriMesh& mesh)
{
    // undirected edge -> (uses as lo->hi, uses as hi->lo)
    std::map<std::pair<int, int>, std::pair<int, int>> edges;
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c];
            const int b = f[(c + 1) % 3];
            auto& uses = edges[{std::min(a, b), std::max(a, b)}];
            (a < b ? uses.first : uses.second) += 1;
        }
    }

    WatertightReport report;
    for (const auto& [edge, uses] : edges) {
        const int total = uses.first + uses.second;
        if (total == 1) {
            ++report.boundary_edge_count;
        } else if (total == 2) {
            if (uses.first != 1) ++report.flipped_edge_count;
        } else {
            ++report.nonmanifold_edge_count;
        }
    }
    report.is_watertight = !mesh.faces.empty() && report.boundary_edge_count == 0 && report.flipped_edge_count == 0 &&
                           report.nonmanifold_edge_count == 0;
    return report;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

std::size_t count_degenerate_faces(const TriMesh& mesh, double tolerance)
{
    std::size_t n = 0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (triangle_area(mesh.face_vertex(f, 0), mesh.face_vertex(f, 1), mesh.face_vertex(f, 2)) < tolerance) ++n;
    }
    return n;
}

TriMesh center_and_normalize(const TriMesh& mesh, double target_radius)
{
    if (!(target_radius > 0.0 && target_radius <= 1.0)) {
        throw ConfigError("normalization radius must lie in (0, 1], got " + std::to_string(target_radius));
    }
    if (mesh.vertices.empty()) throw DataError("cannot normalize an empty mesh");

    Vec3 lo = mesh.vertices.front();
    Vec3 hi = lo;
    for (const Vec3& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    const Vec3 center = 0.5 * (lo + hi);
    double max_radius = 0.0;
    for (const Vec3& v : mesh.vertices) max_radius = std::max(max_radius, (v - center).norm());
    if (!(max_radius > 1e-12)) throw DataError("mesh has zero extent; cannot normalize");

    TriMesh out = mesh;
    const double scale = target_radius / max_radius;
    for (Vec3& v : out.vertices) v = (v - center) * scale;
    return out;
}

long euler_characteristic(const TriMesh& mesh)
{
    std::set<std::pair<int, int>> edges;
    std::set<int> used;
    for (const Face& f : mesh.faces) {
        for (int c = 0; c < 3; ++c) {
            const int a = f[c];
            const int b = f[(c + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
            used.insert(a);
        }
    }
    return static_cast<long>(used.size()) - static_cast<long>(edges.size()) + static_cast<long>(mesh.faces.size());
}

double surface_area(const TriMesh& mesh)
{
    double area = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        area += triangle_area(mesh.face_vertex(f, 0), mesh.face_vertex(f, 1), mesh.face_vertex(f, 2));
    }
    return area;
}

double mesh_volume(const TriMesh& mesh)
{
    double six_volume = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        six_volume += mesh.face_vertex(f, 0).dot(mesh.face_vertex(f, 1).cross(mesh.face_vertex(f, 2)));
    }
    return six_volume / 6.0;
}

TriMesh flip_orientation(TriMesh mesh)
{
    for (Face& f : mesh.faces) std::swap(f[1], f[2]);
    return mesh;
}

TriMesh scale_mesh(TriMesh mesh, double factor)
{
    for (Vec3& v : mesh.vertices) v *= factor;
    return mesh;
}

} // namespace shapeopt::geometry
