#include "shapeopt/geometry/sdf_sampling.hpp"

#include <algorithm>
#include <cmath>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/signed_distance.hpp"

namespace shapeopt::geometry {

std::vector<Vec3> sample_surface_points(const TriMesh& mesh, std::size_t count, Rng& rng)
{
    if (mesh.faces.empty()) throw DataError("cannot sample the surface of an empty mesh");
    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        total += triangle_area(mesh.face_vertex(f, 0), mesh.face_vertex(f, 1), mesh.face_vertex(f, 2));
        cumulative[f] = total;
    }
    if (!(total > 0.0)) throw DataError("mesh has zero surface area");

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec3> points;
    points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double pick = unit(rng) * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        const std::size_t f = std::min<std::size_t>(it - cumulative.begin(), mesh.faces.size() - 1);
        // uniform barycentric coordinates via the square-root warp
        const double r1 = std::sqrt(unit(rng));
        const double r2 = unit(rng);
        const Vec3 a = mesh.face_vertex(f, 0);
        const Vec3 b = mesh.face_vertex(f, 1);
        const Vec3 c = mesh.face_vertex(f, 2);
        points.push_back((1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c);
    }
    return points;
}

SdfSampleSet sample_sdf(const TriMesh& mesh, std::size_t n_total, std::uint64_t seed, const SdfSamplingConfig& cfg,
                        std::string shape_id)
{
    if (n_total < 100) throw ConfigError("sample_sdf needs at least 100 samples, got " + std::to_string(n_total));
    if (!(cfg.surface_fraction >= 0.0 && cfg.surface_fraction <= 1.0) || cfg.sigma_fine < 0.0 || cfg.sigma_coarse < 0.0) {
        throw ConfigError("invalid SDF sampling configuration");
    }
    const MeshDistanceField field(mesh);

    Rng rng(seed);
    const auto n_surface = static_cast<std::size_t>(std::llround(cfg.surface_fraction * static_cast<double>(n_total)));
    const std::size_t n_fine = n_surface / 2;

    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> box(-1.0, 1.0);
    const auto in_domain = [](const Vec3& p) { return p.cwiseAbs().maxCoeff() <= 1.0; };

    SdfSampleSet out;
    out.shape_id = std::move(shape_id);
    out.points.reserve(n_total);
    while (out.points.size() < n_surface) {
        const std::size_t batch = n_surface - out.points.size();
        for (const Vec3& s : sample_surface_points(mesh, batch, rng)) {
            const double sigma = out.points.size() < n_fine ? cfg.sigma_fine : cfg.sigma_coarse;
            const Vec3 p = s + sigma * Vec3(gauss(rng), gauss(rng), gauss(rng));
            if (in_domain(p)) out.points.push_back(p);
        }
    }
    while (out.points.size() < n_total) out.points.emplace_back(box(rng), box(rng), box(rng));

    out.distances = field.signed_distances(out.points);
    return out;
}

} // namespace shapeopt::geometry
