#include "shapeopt/geometry/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/marching_cubes.hpp"

namespace shapeopt::geometry {

TriMesh make_icosphere(double radius, int subdivisions)
{
    if (!(radius > 0.0) || subdivisions < 0) throw ConfigError("icosphere needs radius > 0 and subdivisions >= 0");
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh mesh;
    mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                     {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                  {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                  {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (Vec3& v : mesh.vertices) v.normalize();

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoints;
        const auto midpoint = [&](int a, int b) {
            const auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto [it, inserted] = midpoints.try_emplace(key, static_cast<int>(mesh.vertices.size()));
            if (inserted) mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
            return it->second;
        };
        std::vector<Face> faces;
        faces.reserve(mesh.faces.size() * 4);
        for (const Face& f : mesh.faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            faces.push_back({f[0], ab, ca});
            faces.push_back({f[1], bc, ab});
            faces.push_back({f[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(faces);
    }
    for (Vec3& v : mesh.vertices) v *= radius;
    return mesh;
}

TriMesh make_box(const Vec3& h)
{
    if (!(h.minCoeff() > 0.0)) throw ConfigError("box half extents must be positive");
    TriMesh mesh;
    for (int i = 0; i < 8; ++i) {
        mesh.vertices.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
    }
    mesh.faces = {{0, 2, 3}, {0, 3, 1},   // -z
                  {4, 5, 7}, {4, 7, 6},   // +z
                  {0, 1, 5}, {0, 5, 4},   // -y
                  {2, 6, 7}, {2, 7, 3},   // +y
                  {0, 4, 6}, {0, 6, 2},   // -x
                  {1, 3, 7}, {1, 7, 5}};  // +x
    return mesh;
}

TriMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments)
{
    if (!(minor_radius > 0.0 && minor_radius < major_radius) || major_segments < 3 || minor_segments < 3) {
        throw ConfigError("torus needs 0 < minor < major radius and at least 3 segments per direction");
    }
    TriMesh mesh;
    for (int i = 0; i < major_segments; ++i) {
        const double u = 2.0 * std::numbers::pi * i / major_segments;
        for (int j = 0; j < minor_segments; ++j) {
            const double v = 2.0 * std::numbers::pi * j / minor_segments;
            const double ring = major_radius + minor_radius * std::cos(v);
            mesh.vertices.emplace_back(ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v));
        }
    }
    const auto id = [&](int i, int j) { return (i % major_segments) * minor_segments + (j % minor_segments); };
    for (int i = 0; i < major_segments; ++i) {
        for (int j = 0; j < minor_segments; ++j) {
            mesh.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            mesh.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return mesh;
}

TriMesh make_capsule(double radius, double half_length, int resolution)
{
    if (!(radius > 0.0) || half_length < 0.0 || radius + half_length >= 0.95 || radius >= 0.95) {
        throw ConfigError("capsule must have radius > 0, half_length >= 0 and fit inside the unit domain");
    }
    const auto sdf = [=](const Vec3& p) {
        const double z = std::clamp(p.z(), -half_length, half_length);
        return (p - Vec3(0.0, 0.0, z)).norm() - radius;
    };
    return marching_cubes(sample_grid(sdf, resolution), 0.0);
}

namespace {

double segment_distance_2d(double px, double py, double ax, double ay, double bx, double by)
{
    const double dx = bx - ax;
    const double dy = by - ay;
    const double t = std::clamp(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
    return std::hypot(px - ax - t * dx, py - ay - t * dy);
}

} // namespace

TriMesh make_wheel(const WheelParams& w, int resolution)
{
    if (w.spokes < 1 || !(w.hub_radius > 0.0 && w.hub_radius < w.rim_inner && w.rim_inner < w.rim_outer &&
                          w.rim_outer < 0.95 && w.spoke_width > 0.0 && w.thickness > 0.0 && w.thickness < 1.8)) {
        throw ConfigError("wheel parameters must satisfy 0 < hub < rim_inner < rim_outer < 0.95 with positive widths");
    }
    const double rim_center = 0.5 * (w.rim_inner + w.rim_outer);
    const double rim_half = 0.5 * (w.rim_outer - w.rim_inner);
    std::vector<std::array<double, 2>> directions;
    for (int s = 0; s < w.spokes; ++s) {
        const double a = 2.0 * std::numbers::pi * s / w.spokes;
        directions.push_back({std::cos(a), std::sin(a)});
    }
    const auto sdf = [=](const Vec3& p) {
        const double r = std::hypot(p.x(), p.y());
        double d2 = std::min(std::abs(r - rim_center) - rim_half, r - w.hub_radius);
        for (const auto& dir : directions) {
            const double spoke = segment_distance_2d(p.x(), p.y(), 0.0, 0.0, rim_center * dir[0], rim_center * dir[1]);
            d2 = std::min(d2, spoke - 0.5 * w.spoke_width);
        }
        // extrude along z
        const double dz = std::abs(p.z()) - 0.5 * w.thickness;
        const double ox = std::max(d2, 0.0);
        const double oz = std::max(dz, 0.0);
        return std::hypot(ox, oz) + std::min(std::max(d2, dz), 0.0);
    };
    return marching_cubes(sample_grid(sdf, resolution), 0.0);
}

namespace {

struct ParamDomain {
    double lo;
    double hi;
    double fallback;
};

using FamilyDomains = std::map<std::string, ParamDomain>;

const std::map<std::string, FamilyDomains>& family_domains()
{
    static const std::map<std::string, FamilyDomains> domains = {
        {"sphere", {{"radius", {0.05, 0.95, 0.8}}, {"subdivisions", {0, 6, 4}}}},
        {"box", {{"hx", {0.05, 0.95, 0.5}}, {"hy", {0.05, 0.95, 0.5}}, {"hz", {0.05, 0.95, 0.5}}}},
        {"torus", {{"major", {0.1, 0.9, 0.6}}, {"minor", {0.02, 0.5, 0.2}}}},
        {"capsule", {{"radius", {0.05, 0.9, 0.3}}, {"half_length", {0.0, 0.9, 0.4}}, {"resolution", {8, 256, 64}}}},
        {"wheel",
         {{"spokes", {1, 16, 4}},
          {"rim_outer", {0.1, 0.94, 0.85}},
          {"rim_inner", {0.05, 0.94, 0.65}},
          {"hub_radius", {0.02, 0.9, 0.2}},
          {"spoke_width", {0.01, 0.5, 0.12}},
          {"thickness", {0.02, 1.8, 0.25}},
          {"resolution", {8, 256, 64}}}},
    };
    return domains;
}

} // namespace

std::vector<ProceduralShape> generate_procedural_dataset(const std::vector<ProceduralFamilySpec>& spec, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<ProceduralShape> shapes;
    std::map<std::string, int> family_counter;
    for (const ProceduralFamilySpec& fam : spec) {
        const auto dom_it = family_domains().find(fam.family);
        if (dom_it == family_domains().end()) throw ConfigError("unknown procedural family '" + fam.family + "'");
        if (fam.count < 1) throw ConfigError("procedural family '" + fam.family + "' needs count >= 1");
        const FamilyDomains& domains = dom_it->second;
        for (const auto& [name, range] : fam.ranges) {
            const auto d = domains.find(name);
            if (d == domains.end()) throw ConfigError("family '" + fam.family + "' has no parameter '" + name + "'");
            if (!(range.first <= range.second) || range.first < d->second.lo || range.second > d->second.hi) {
                throw ConfigError("invalid range for " + fam.family + "." + name);
            }
        }

        for (int c = 0; c < fam.count; ++c) {
            std::map<std::string, double> p;
            for (const auto& [name, d] : domains) {  // map order keeps the draw sequence stable
                const auto r = fam.ranges.find(name);
                if (r == fam.ranges.end()) {
                    p[name] = d.fallback;
                } else {
                    p[name] = std::uniform_real_distribution<double>(r->second.first, r->second.second)(rng);
                }
            }
            const auto as_int = [&](const std::string& key) { return static_cast<int>(std::lround(p.at(key))); };

            ProceduralShape shape;
            shape.id = fam.family + "_" + std::to_string(family_counter[fam.family]++);
            if (fam.family == "sphere") {
                shape.mesh = make_icosphere(p["radius"], as_int("subdivisions"));
            } else if (fam.family == "box") {
                shape.mesh = make_box(Vec3(p["hx"], p["hy"], p["hz"]));
            } else if (fam.family == "torus") {
                shape.mesh = make_torus(p["major"], p["minor"]);
            } else if (fam.family == "capsule") {
                shape.mesh = make_capsule(p["radius"], p["half_length"], as_int("resolution"));
            } else {
                WheelParams w;
                w.spokes = as_int("spokes");
                w.rim_outer = p["rim_outer"];
                w.rim_inner = p["rim_inner"];
                w.hub_radius = p["hub_radius"];
                w.spoke_width = p["spoke_width"];
                w.thickness = p["thickness"];
                shape.mesh = make_wheel(w, as_int("resolution"));
            }
            shapes.push_back(std::move(shape));
        }
    }
    return shapes;
}

} // namespace shapeopt::geometry
