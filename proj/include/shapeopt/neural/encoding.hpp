#pragma once

#include <Eigen/Dense>

#include "shapeopt/types.hpp"

namespace shapeopt::neural {

/// Fourier feature mapping of 3D coordinates.
struct EncodingConfig {
    int levels = 6;  // frequency octaves 2^0 .. 2^(levels-1)
    bool include_input = true;

    /// 3 * (2 * levels + include_input)
    [[nodiscard]] int dim() const { return 3 * (2 * levels + (include_input ? 1 : 0)); }
};

/// Layout: raw (x, y, z) first when include_input, then for each coordinate in turn
/// sin(2^0 pi p), cos(2^0 pi p), ..., sin(2^(L-1) pi p), cos(2^(L-1) pi p).
[[nodiscard]] Eigen::VectorXd positional_encoding(const Vec3& p, const EncodingConfig& cfg);

/// Column-wise encoding of a 3 x B block of points into a dim() x B block.
[[nodiscard]] Eigen::MatrixXd positional_encoding(const Eigen::Matrix3Xd& points, const EncodingConfig& cfg);

} // namespace shapeopt::neural
