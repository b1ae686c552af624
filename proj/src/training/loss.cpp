#include "shapeopt/training/loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "shapeopt/error.hpp"

namespace shapeopt::training {

double truncated_l1(double d_pred, double d_gt, double delta)
{
    if (d_gt < -delta) return std::max(d_pred, -delta) + delta;
    if (d_gt > delta) return delta - std::min(d_pred, delta);
    return std::abs(d_pred - d_gt);
}

double truncated_l1_derivative(double d_pred, double d_gt, double delta)
{
    if (d_gt < -delta) return d_pred > -delta ? 1.0 : 0.0;
    if (d_gt > delta) return d_pred < delta ? -1.0 : 0.0;
    if (d_pred > d_gt) return 1.0;
    if (d_pred < d_gt) return -1.0;
    return 0.0;
}

neural::LossBreakdown total_loss(const neural::DecoderParams& params, const Eigen::VectorXd& z,
                                 const Eigen::Matrix3Xd& points, const Eigen::VectorXd& distances,
                                 const neural::LossConfig& cfg)
{
    neural::SampleBatch batch;
    batch.points = points;
    batch.distances = distances;
    batch.shape_index.assign(static_cast<std::size_t>(points.cols()), 0);
    Eigen::MatrixXd latents = z;
    return neural::evaluate_loss(params, batch, latents, cfg);
}

} // namespace shapeopt::training
