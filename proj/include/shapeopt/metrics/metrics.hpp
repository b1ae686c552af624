#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapeopt/geometry/mesh.hpp"
#include "shapeopt/types.hpp"

namespace shapeopt::metrics {

struct PointCloud {
    std::vector<Vec3> points;
    std::string source_id;

    void validate() const;
};

/// Area-weighted uniform surface samples; deterministic per seed.
[[nodiscard]] PointCloud sample_surface(const geometry::TriMesh& mesh, std::size_t n, std::uint64_t seed,
                                        std::string source_id = {});

/// Clouds larger than this use the grid search in nearest_squared_distances.
inline constexpr std::size_t exhaustive_search_limit = 2000;

/// For every query, the squared distance to its nearest reference point. Reference sets above
/// exhaustive_search_limit are bucketed into a uniform grid; results equal the exhaustive search.
[[nodiscard]] std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& refs);

/// Sum over a of nearest squared distances into b, plus the same from b into a.
[[nodiscard]] double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// Chamfer distance of every (generated, reference) pair; rows index generated clouds.
[[nodiscard]] Eigen::MatrixXd chamfer_matrix(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference);

/// Mean over reference clouds of the distance to their closest generated cloud.
[[nodiscard]] double mmd_from_matrix(const Eigen::MatrixXd& distances);
/// Fraction of reference clouds that are the closest match (lowest index on ties) of some generated cloud.
[[nodiscard]] double coverage_from_matrix(const Eigen::MatrixXd& distances);

[[nodiscard]] double mmd(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference);
[[nodiscard]] double coverage(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference);

struct Summary {
    double mean = 0.0;
    double median = 0.0;
};

[[nodiscard]] Summary summarize(std::vector<double> values);

} // namespace shapeopt::metrics
