#include "shapeopt/training/reconstruct.hpp"

#include <exception>
#include <string>

#include "shapeopt/error.hpp"

namespace shapeopt::training {

geometry::ScalarGrid decoder_grid(const neural::DecoderParams& params, const Eigen::VectorXd& z, int resolution)
{
    if (z.size() != params.latent_dim) {
        throw ConfigError("latent has " + std::to_string(z.size()) + " entries, decoder expects " +
                          std::to_string(params.latent_dim));
    }
    geometry::ScalarGrid grid = geometry::ScalarGrid::unit_domain(resolution);
    const int n = resolution;
    const Eigen::MatrixXd slice_latents = z.replicate(1, static_cast<Eigen::Index>(n) * n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        try {
            Eigen::Matrix3Xd points(3, static_cast<Eigen::Index>(n) * n);
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) points.col(static_cast<Eigen::Index>(j) * n + i) = grid.position(i, j, k);
            }
            const Eigen::VectorXd values = neural::decoder_forward(params, points, slice_latents);
            for (Eigen::Index c = 0; c < values.size(); ++c) grid.values[grid.index(0, 0, k) + static_cast<std::size_t>(c)] = values(c);
        } catch (...) {
#pragma omp critical(decoder_grid_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return grid;
}

geometry::TriMesh reconstruct(const neural::DecoderParams& params, const Eigen::VectorXd& z, int resolution)
{
    return geometry::marching_cubes(decoder_grid(params, z, resolution), 0.0);
}

} // namespace shapeopt::training
