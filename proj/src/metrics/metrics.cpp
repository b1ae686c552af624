#include "shapeopt/metrics/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/sdf_sampling.hpp"

namespace shapeopt::metrics {

void PointCloud::validate() const
{
    if (points.empty()) throw DataError("point cloud '" + source_id + "' is empty");
    for (const Vec3& p : points) {
        if (!p.allFinite()) throw DataError("point cloud '" + source_id + "' has a non-finite point");
    }
}

PointCloud sample_surface(const geometry::TriMesh& mesh, std::size_t n, std::uint64_t seed, std::string source_id)
{
    if (n < 1) throw ConfigError("surface sample count must be >= 1");
    Rng rng(seed);
    return {geometry::sample_surface_points(mesh, n, rng), std::move(source_id)};
}

namespace {

double nearest_exhaustive(const Vec3& q, const std::vector<Vec3>& refs)
{
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& r : refs) best = std::min(best, squared_distance(q, r));
    return best;
}

class PointGrid {
public:
    explicit PointGrid(const std::vector<Vec3>& points) : points_(points)
    {
        lo_ = points.front();
        Vec3 hi = points.front();
        for (const Vec3& p : points) {
            lo_ = lo_.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec3 extent = hi - lo_;
        const double target_cells = std::max(1.0, static_cast<double>(points.size()) / 2.0);
        double largest = extent.maxCoeff();
        if (!(largest > 0.0)) largest = 1.0;
        cell_ = std::max(largest / std::cbrt(target_cells), largest * 1e-6);
        for (int a = 0; a < 3; ++a) {
            dims_[a] = std::clamp(static_cast<int>(extent[a] / cell_) + 1, 1, 1024);
        }
        cell_start_.assign(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2] + 1, 0);
        std::vector<std::size_t> cell_of(points.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
            cell_of[i] = flat(cell_coord(points[i]));
            ++cell_start_[cell_of[i] + 1];
        }
        for (std::size_t c = 1; c < cell_start_.size(); ++c) cell_start_[c] += cell_start_[c - 1];
        members_.resize(points.size());
        std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i) members_[fill[cell_of[i]]++] = i;
    }

    [[nodiscard]] double nearest(const Vec3& q) const
    {
        const std::array<int, 3> c = cell_coord(q);
        double best = std::numeric_limits<double>::infinity();
        for (int r = 0;; ++r) {
            std::array<int, 3> lo{}, hi{};
            for (int a = 0; a < 3; ++a) {
                lo[a] = std::max(c[a] - r, 0);
                hi[a] = std::min(c[a] + r, dims_[a] - 1);
            }
            for (int k = lo[2]; k <= hi[2]; ++k) {
                for (int j = lo[1]; j <= hi[1]; ++j) {
                    for (int i = lo[0]; i <= hi[0]; ++i) {
                        const bool on_shell = std::abs(i - c[0]) == r || std::abs(j - c[1]) == r || std::abs(k - c[2]) == r;
                        if (!on_shell) continue;
                        const std::size_t cell = flat({i, j, k});
                        for (std::size_t m = cell_start_[cell]; m < cell_start_[cell + 1]; ++m) {
                            best = std::min(best, squared_distance(q, points_[members_[m]]));
                        }
                    }
                }
            }
            // Unvisited cells lie beyond one of the cube faces that is still inside the grid.
            double bound = std::numeric_limits<double>::infinity();
            for (int a = 0; a < 3; ++a) {
                if (c[a] - r > 0) bound = std::min(bound, q[a] - (lo_[a] + (c[a] - r) * cell_));
                if (c[a] + r < dims_[a] - 1) bound = std::min(bound, lo_[a] + (c[a] + r + 1) * cell_ - q[a]);
            }
            if (bound == std::numeric_limits<double>::infinity()) return best;
            // slack absorbs rounding in the cell assignment
            bound = std::max(bound - cell_ * 1e-9, 0.0);
            if (best * (1.0 + 1e-9) < bound * bound) return best;
        }
    }

private:
    [[nodiscard]] std::array<int, 3> cell_coord(const Vec3& p) const
    {
        std::array<int, 3> c{};
        for (int a = 0; a < 3; ++a) {
            const double t = std::floor((p[a] - lo_[a]) / cell_);
            c[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(dims_[a] - 1)));
        }
        return c;
    }

    [[nodiscard]] std::size_t flat(const std::array<int, 3>& c) const
    {
        return (static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
    }

    const std::vector<Vec3>& points_;
    Vec3 lo_;
    double cell_ = 1.0;
    std::array<int, 3> dims_{1, 1, 1};
    std::vector<std::size_t> cell_start_;
    std::vector<std::size_t> members_;
};

} // namespace

std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& refs)
{
    if (refs.empty()) throw DataError("nearest-neighbour search needs a non-empty reference set");
    std::vector<double> out(queries.size());
    const long n = static_cast<long>(queries.size());
    if (refs.size() <= exhaustive_search_limit) {
#pragma omp parallel for schedule(static) if (n > 256)
        for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest_exhaustive(queries[static_cast<std::size_t>(i)], refs);
        return out;
    }
    const PointGrid grid(refs);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = grid.nearest(queries[static_cast<std::size_t>(i)]);
    return out;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b)
{
    a.validate();
    b.validate();
    double total = 0.0;
    for (double d : nearest_squared_distances(a.points, b.points)) total += d;
    double reverse = 0.0;
    for (double d : nearest_squared_distances(b.points, a.points)) reverse += d;
    return total + reverse;
}

Eigen::MatrixXd chamfer_matrix(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference)
{
    if (generated.empty() || reference.empty()) throw DataError("metrics need non-empty generated and reference sets");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(generated.size()), static_cast<Eigen::Index>(reference.size()));
    for (std::size_t g = 0; g < generated.size(); ++g) {
        for (std::size_t r = 0; r < reference.size(); ++r) {
            out(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(r)) = chamfer_distance(generated[g], reference[r]);
        }
    }
    return out;
}

double mmd_from_matrix(const Eigen::MatrixXd& distances)
{
    if (distances.size() == 0) throw DataError("metrics need non-empty generated and reference sets");
    double total = 0.0;
    for (Eigen::Index r = 0; r < distances.cols(); ++r) {
        double best = distances(0, r);
        for (Eigen::Index g = 1; g < distances.rows(); ++g) best = std::min(best, distances(g, r));
        total += best;
    }
    return total / static_cast<double>(distances.cols());
}

double coverage_from_matrix(const Eigen::MatrixXd& distances)
{
    if (distances.size() == 0) throw DataError("metrics need non-empty generated and reference sets");
    std::vector<bool> matched(static_cast<std::size_t>(distances.cols()), false);
    for (Eigen::Index g = 0; g < distances.rows(); ++g) {
        Eigen::Index best = 0;
        for (Eigen::Index r = 1; r < distances.cols(); ++r) {
            if (distances(g, r) < distances(g, best)) best = r;
        }
        matched[static_cast<std::size_t>(best)] = true;
    }
    const auto hits = std::count(matched.begin(), matched.end(), true);
    return static_cast<double>(hits) / static_cast<double>(distances.cols());
}

double mmd(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference)
{
    return mmd_from_matrix(chamfer_matrix(generated, reference));
}

double coverage(const std::vector<PointCloud>& generated, const std::vector<PointCloud>& reference)
{
    return coverage_from_matrix(chamfer_matrix(generated, reference));
}

Summary summarize(std::vector<double> values)
{
    if (values.empty()) throw DataError("cannot summarize an empty list");
    Summary s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    s.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    return s;
}

} // namespace shapeopt::metrics
