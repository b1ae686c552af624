#include "shapeopt/geometry/signed_distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "shapeopt/error.hpp"

namespace shapeopt::geometry {

double point_triangle_distance_sq(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Closest point by Voronoi region of the triangle (Ericson, Real-Time Collision Detection 5.1.5).
    const Vec3 ab = b - a;
    const Vec3 ac = c - a;
    const Vec3 ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return squared_distance(p, a);

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return squared_distance(p, b);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return squared_distance(p, a + v * ab);
    }

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return squared_distance(p, c);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return squared_distance(p, a + w * ac);
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return squared_distance(p, b + w * (c - b));
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return squared_distance(p, a + ab * v + ac * w);
}

double winding_number(const TriMesh& mesh, const Vec3& p)
{
    // Van Oosterom-Strackee solid angle per triangle.
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Vec3 a = mesh.face_vertex(f, 0) - p;
        const Vec3 b = mesh.face_vertex(f, 1) - p;
        const Vec3 c = mesh.face_vertex(f, 2) - p;
        const double la = a.norm();
        const double lb = b.norm();
        const double lc = c.norm();
        const double numer = a.dot(b.cross(c));
        const double denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
        total += 2.0 * std::atan2(numer, denom);
    }
    return total / (4.0 * std::numbers::pi);
}

struct MeshDistanceField::Tree {
    struct Node {
        Vec3 lo;
        Vec3 hi;
        int left = -1;  // child indices; -1 for leaves
        int right = -1;
        int begin = 0;  // range into `order` for leaves
        int end = 0;
    };

    std::vector<Node> nodes;
    std::vector<int> order;

    static constexpr int leaf_size = 4;

    int build(const TriMesh& mesh, const std::vector<Vec3>& centroids, int begin, int end)
    {
        Node node;
        node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        node.hi = -node.lo;
        Vec3 clo = node.lo;
        Vec3 chi = node.hi;
        for (int i = begin; i < end; ++i) {
            const int f = order[i];
            for (int c = 0; c < 3; ++c) {
                node.lo = node.lo.cwiseMin(mesh.face_vertex(f, c));
                node.hi = node.hi.cwiseMax(mesh.face_vertex(f, c));
            }
            clo = clo.cwiseMin(centroids[f]);
            chi = chi.cwiseMax(centroids[f]);
        }
        const int id = static_cast<int>(nodes.size());
        nodes.push_back(node);
        if (end - begin <= leaf_size) {
            nodes[id].begin = begin;
            nodes[id].end = end;
            return id;
        }
        int axis = 0;
        (chi - clo).maxCoeff(&axis);
        const int mid = (begin + end) / 2;
        std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end, [&](int x, int y) {
            return centroids[x][axis] < centroids[y][axis] || (centroids[x][axis] == centroids[y][axis] && x < y);
        });
        const int left = build(mesh, centroids, begin, mid);
        const int right = build(mesh, centroids, mid, end);
        nodes[id].left = left;
        nodes[id].right = right;
        return id;
    }

    static double box_distance_sq(const Node& n, const Vec3& p)
    {
        double d = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double excess = std::max({n.lo[c] - p[c], 0.0, p[c] - n.hi[c]});
            d += excess * excess;
        }
        return d;
    }

    static bool ray_hits_box(const Node& n, const Vec3& o, const Vec3& inv_dir)
    {
        double tmin = 0.0;
        double tmax = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 3; ++c) {
            double t0 = (n.lo[c] - o[c]) * inv_dir[c];
            double t1 = (n.hi[c] - o[c]) * inv_dir[c];
            if (t0 > t1) std::swap(t0, t1);
            tmin = std::max(tmin, t0);
            tmax = std::min(tmax, t1);
        }
        // small slack so rays grazing a box face are not discarded
        return tmin <= tmax * (1.0 + 1e-12) + 1e-12;
    }
};

MeshDistanceField::MeshDistanceField(TriMesh mesh) : mesh_(std::move(mesh)), tree_(std::make_unique<Tree>())
{
    check_indices(mesh_);
    const WatertightReport report = validate_watertight(mesh_);
    if (!report.is_watertight) {
        throw DataError("signed distance requires a watertight mesh (" + std::to_string(report.boundary_edge_count) +
                        " boundary, " + std::to_string(report.flipped_edge_count) + " flipped edges)");
    }
    std::vector<Vec3> centroids(mesh_.faces.size());
    for (std::size_t f = 0; f < mesh_.faces.size(); ++f) {
        centroids[f] = (mesh_.face_vertex(f, 0) + mesh_.face_vertex(f, 1) + mesh_.face_vertex(f, 2)) / 3.0;
    }
    tree_->order.resize(mesh_.faces.size());
    std::iota(tree_->order.begin(), tree_->order.end(), 0);
    tree_->nodes.reserve(2 * mesh_.faces.size() / Tree::leaf_size + 2);
    tree_->build(mesh_, centroids, 0, static_cast<int>(mesh_.faces.size()));
}

MeshDistanceField::~MeshDistanceField() = default;
MeshDistanceField::MeshDistanceField(MeshDistanceField&&) noexcept = default;
MeshDistanceField& MeshDistanceField::operator=(MeshDistanceField&&) noexcept = default;

double MeshDistanceField::unsigned_distance(const Vec3& p) const
{
    double best = std::numeric_limits<double>::infinity();
    std::array<int, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Tree::Node& node = tree_->nodes[stack[--top]];
        // margin keeps pruning conservative against rounding in the triangle routine
        if (Tree::box_distance_sq(node, p) > best * (1.0 + 1e-9) + 1e-300) continue;
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int f = tree_->order[i];
                best = std::min(best, point_triangle_distance_sq(p, mesh_.face_vertex(f, 0), mesh_.face_vertex(f, 1),
                                                                 mesh_.face_vertex(f, 2)));
            }
            continue;
        }
        const double dl = Tree::box_distance_sq(tree_->nodes[node.left], p);
        const double dr = Tree::box_distance_sq(tree_->nodes[node.right], p);
        // visit the nearer child first
        if (dl < dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    return std::sqrt(best);
}

int MeshDistanceField::ray_parity(const Vec3& origin, const Vec3& dir) const
{
    const Vec3 inv_dir = dir.cwiseInverse();
    int hits = 0;
    std::array<int, 128> stack{};
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Tree::Node& node = tree_->nodes[stack[--top]];
        if (!Tree::ray_hits_box(node, origin, inv_dir)) continue;
        if (node.left >= 0) {
            stack[top++] = node.left;
            stack[top++] = node.right;
            continue;
        }
        for (int i = node.begin; i < node.end; ++i) {
            const int f = tree_->order[i];
            // Moller-Trumbore
            const Vec3 a = mesh_.face_vertex(f, 0);
            const Vec3 e1 = mesh_.face_vertex(f, 1) - a;
            const Vec3 e2 = mesh_.face_vertex(f, 2) - a;
            const Vec3 pv = dir.cross(e2);
            const double det = e1.dot(pv);
            if (std::abs(det) < 1e-300) continue;
            const double inv_det = 1.0 / det;
            const Vec3 tv = origin - a;
            const double u = tv.dot(pv) * inv_det;
            if (u < 0.0 || u > 1.0) continue;
            const Vec3 qv = tv.cross(e1);
            const double v = dir.dot(qv) * inv_det;
            if (v < 0.0 || u + v > 1.0) continue;
            const double t = e2.dot(qv) * inv_det;
            if (t > 0.0) ++hits;
        }
    }
    return hits & 1;
}

bool MeshDistanceField::is_inside(const Vec3& p) const
{
    // irrational-ish directions avoid running along lattice-aligned edges
    static const std::array<Vec3, 3> directions = {
        Vec3(0.5773502691896258, 0.5773502691896258, 0.5773502691896258),
        Vec3(-0.2672612419124244, 0.8017837257372732, -0.5345224838248488),
        Vec3(0.8164965809277261, -0.4082482904638631, -0.4082482904638630),
    };
    const int p0 = ray_parity(p, directions[0]);
    const int p1 = ray_parity(p, directions[1]);
    const int p2 = ray_parity(p, directions[2]);
    if (p0 == p1 && p1 == p2) return p0 == 1;
    return winding_number(mesh_, p) > 0.5;
}

double MeshDistanceField::signed_distance(const Vec3& p) const
{
    const double d = unsigned_distance(p);
    if (d == 0.0) return 0.0;
    return is_inside(p) ? -d : d;
}

std::vector<double> MeshDistanceField::signed_distances(std::span<const Vec3> points) const
{
    std::vector<double> out(points.size());
    const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) out[i] = signed_distance(points[i]);
    return out;
}

double signed_distance(const TriMesh& mesh, const Vec3& query)
{
    return MeshDistanceField(mesh).signed_distance(query);
}

} // namespace shapeopt::geometry
