#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shapeopt/geometry/mesh.hpp"

namespace shapeopt::geometry {

/// (point, signed distance) training pairs for one shape.
struct SdfSampleSet {
    std::string shape_id;
    std::vector<Vec3> points;
    std::vector<double> distances;

    [[nodiscard]] std::size_t size() const { return points.size(); }
};

struct SdfSamplingConfig {
    double surface_fraction = 0.95;
    // near-surface samples are split evenly between these two noise levels
    double sigma_fine = 0.01;
    double sigma_coarse = 0.05;
};

/// Area-weighted uniform points on the surface.
[[nodiscard]] std::vector<Vec3> sample_surface_points(const TriMesh& mesh, std::size_t count, Rng& rng);

/// Near-surface and uniform samples with signed distances; deterministic per seed.
/// Requires a watertight mesh and n_total >= 100. Near-surface draws falling outside
/// [-1,1]^3 are redrawn.
[[nodiscard]] SdfSampleSet sample_sdf(const TriMesh& mesh, std::size_t n_total, std::uint64_t seed,
                                      const SdfSamplingConfig& cfg = {}, std::string shape_id = {});

} // namespace shapeopt::geometry
