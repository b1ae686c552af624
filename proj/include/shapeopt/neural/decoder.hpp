#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "shapeopt/neural/encoding.hpp"
#include "shapeopt/types.hpp"

namespace shapeopt::neural {

[[nodiscard]] double softplus(double k);
[[nodiscard]] double sigmoid(double k);
[[nodiscard]] double inverse_softplus(double y);

/// Fully connected layer whose weight rows are rescaled to an absolute row sum of at most
/// softplus(k). The bound k is trained alongside W and b.
struct LipschitzLayer {
    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
    double k = 0.0;

    [[nodiscard]] double bound() const { return softplus(k); }
    [[nodiscard]] Eigen::Index inputs() const { return weight.cols(); }
    [[nodiscard]] Eigen::Index outputs() const { return weight.rows(); }
};

/// Rows with absolute sum above softplus(k) are scaled down onto the bound; others pass unchanged.
[[nodiscard]] Eigen::MatrixXd lipschitz_normalize(const LipschitzLayer& layer);

struct ArchitectureConfig {
    EncodingConfig encoding;
    int latent_dim = 5;
    int hidden_layers = 8;
    int hidden_width = 256;
    double output_scale = 0.1;  // final tanh is scaled to [-output_scale, output_scale]
};

/// Decoder f(x, z): input [encode(x); z], ReLU hidden layers, scaled tanh output.
struct DecoderParams {
    EncodingConfig encoding;
    int latent_dim = 1;
    double output_scale = 0.1;
    std::vector<LipschitzLayer> layers;

    [[nodiscard]] int input_dim() const { return encoding.dim() + latent_dim; }
    [[nodiscard]] std::size_t parameter_count() const;
    /// Throws ConfigError on inconsistent layer dimensions.
    void validate() const;
};

/// Weights and biases uniform in +-1/sqrt(fan_in); each k starts at twice the layer's
/// largest absolute row sum so that normalization is initially inactive.
[[nodiscard]] DecoderParams init_decoder(const ArchitectureConfig& arch, Rng& rng);

/// Product of softplus(k_i), accumulated in the log domain.
[[nodiscard]] double lipschitz_loss(const DecoderParams& params);

[[nodiscard]] double decoder_forward(const DecoderParams& params, const Vec3& x, const Eigen::VectorXd& z);

/// One output per column; `latents` holds one latent column per point.
[[nodiscard]] Eigen::VectorXd decoder_forward(const DecoderParams& params, const Eigen::Matrix3Xd& points,
                                              const Eigen::MatrixXd& latents);

/// All points share the latent `z`.
[[nodiscard]] Eigen::VectorXd decoder_forward_shared(const DecoderParams& params, const Eigen::Matrix3Xd& points,
                                                     const Eigen::VectorXd& z);

/// Training pairs drawn from one or more shapes; shape_index selects a latent column.
struct SampleBatch {
    Eigen::Matrix3Xd points;
    Eigen::VectorXd distances;
    std::vector<int> shape_index;

    [[nodiscard]] Eigen::Index size() const { return points.cols(); }
};

struct LossConfig {
    double delta = 0.1;
    double w_ad = 1e-7;
};

struct LossBreakdown {
    double clip = 0.0;       // mean truncated L1 over the batch
    double latent = 0.0;     // mean over samples of |z_shape|^2
    double lipschitz = 0.0;  // unweighted product of bounds
    double total = 0.0;      // clip + latent + w_ad * lipschitz
};

struct GradientBundle {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd k;
    Eigen::MatrixXd latents;  // latent_dim x shapes

    [[nodiscard]] bool all_finite() const;
};

struct BackwardResult {
    LossBreakdown loss;
    GradientBundle grad;
};

/// Loss only (no gradients). Throws NumericError on non-finite intermediates.
[[nodiscard]] LossBreakdown evaluate_loss(const DecoderParams& params, const SampleBatch& batch,
                                          const Eigen::MatrixXd& latents, const LossConfig& cfg);

/// Exact gradient of the batch loss with respect to W, b, k of every layer and every latent column.
/// Throws NumericError naming the layer where a non-finite value first appears.
[[nodiscard]] BackwardResult decoder_backward(const DecoderParams& params, const SampleBatch& batch,
                                              const Eigen::MatrixXd& latents, const LossConfig& cfg);

} // namespace shapeopt::neural
