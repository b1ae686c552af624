#pragma once

#include <Eigen/Dense>

#include "shapeopt/neural/decoder.hpp"

namespace shapeopt::training {

/// Clamped L1 between predicted and true distance. Targets beyond +-delta only penalize
/// predictions that fall short of the band edge on the correct side; |d_gt| == delta uses
/// the in-band branch.
[[nodiscard]] double truncated_l1(double d_pred, double d_gt, double delta);

/// Derivative with respect to d_pred (0 at the kinks).
[[nodiscard]] double truncated_l1_derivative(double d_pred, double d_gt, double delta);

/// Loss of one shape's batch under latent `z`: mean clip + |z|^2 + w_ad * lipschitz.
[[nodiscard]] neural::LossBreakdown total_loss(const neural::DecoderParams& params, const Eigen::VectorXd& z,
                                               const Eigen::Matrix3Xd& points, const Eigen::VectorXd& distances,
                                               const neural::LossConfig& cfg);

} // namespace shapeopt::training
