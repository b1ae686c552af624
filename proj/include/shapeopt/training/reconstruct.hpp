#pragma once

#include <Eigen/Dense>

#include "shapeopt/geometry/marching_cubes.hpp"
#include "shapeopt/neural/decoder.hpp"

namespace shapeopt::training {

/// Decoder values on the [-1,1]^3 lattice for latent z; slices are evaluated in parallel.
[[nodiscard]] geometry::ScalarGrid decoder_grid(const neural::DecoderParams& params, const Eigen::VectorXd& z, int resolution);

/// Zero level set of the decoder for latent z. Throws EmptySurfaceError when there is none.
[[nodiscard]] geometry::TriMesh reconstruct(const neural::DecoderParams& params, const Eigen::VectorXd& z, int resolution);

} // namespace shapeopt::training
