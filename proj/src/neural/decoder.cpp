#include "shapeopt/neural/decoder.hpp"

#include <cmath>
#include <string>

#include "shapeopt/error.hpp"
#include "shapeopt/training/loss.hpp"

namespace shapeopt::neural {

double softplus(double k)
{
    return std::max(k, 0.0) + std::log1p(std::exp(-std::abs(k)));
}

double sigmoid(double k)
{
    if (k >= 0.0) return 1.0 / (1.0 + std::exp(-k));
    const double e = std::exp(k);
    return e / (1.0 + e);
}

double inverse_softplus(double y)
{
    if (!(y > 0.0)) throw ConfigError("softplus is positive; cannot invert " + std::to_string(y));
    // log(exp(y) - 1) = y + log(1 - exp(-y))
    return y + std::log(-std::expm1(-y));
}

Eigen::MatrixXd lipschitz_normalize(const LipschitzLayer& layer)
{
    const double bound = layer.bound();
    Eigen::MatrixXd out = layer.weight;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        const double row_sum = out.row(r).cwiseAbs().sum();
        if (row_sum > bound) out.row(r) *= bound / row_sum;
    }
    return out;
}

std::size_t DecoderParams::parameter_count() const
{
    std::size_t n = 0;
    for (const LipschitzLayer& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size() + 1);
    return n;
}

void DecoderParams::validate() const
{
    if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
    if (layers.empty()) throw ConfigError("decoder needs at least one layer");
    if (!(output_scale > 0.0)) throw ConfigError("decoder output scale must be positive");
    Eigen::Index expected = input_dim();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LipschitzLayer& l = layers[i];
        if (l.inputs() != expected || l.bias.size() != l.outputs()) {
            throw ConfigError("layer " + std::to_string(i) + " dimensions do not chain");
        }
        expected = l.outputs();
    }
    if (expected != 1) throw ConfigError("last decoder layer must have one output");
}

DecoderParams init_decoder(const ArchitectureConfig& arch, Rng& rng)
{
    if (arch.hidden_layers < 0 || arch.hidden_width < 1) throw ConfigError("invalid hidden layer layout");
    DecoderParams params;
    params.encoding = arch.encoding;
    params.latent_dim = arch.latent_dim;
    params.output_scale = arch.output_scale;

    std::vector<int> widths{params.input_dim()};
    for (int i = 0; i < arch.hidden_layers; ++i) widths.push_back(arch.hidden_width);
    widths.push_back(1);

    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(widths[i]));
        std::uniform_real_distribution<double> uni(-limit, limit);
        LipschitzLayer layer;
        layer.weight.resize(widths[i + 1], widths[i]);
        layer.bias.resize(widths[i + 1]);
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = uni(rng);
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = uni(rng);
        const double inf_norm = layer.weight.cwiseAbs().rowwise().sum().maxCoeff();
        layer.k = inverse_softplus(2.0 * inf_norm);
        params.layers.push_back(std::move(layer));
    }
    params.validate();
    return params;
}

double lipschitz_loss(const DecoderParams& params)
{
    if (params.layers.empty()) throw ConfigError("lipschitz loss needs at least one layer");
    double log_sum = 0.0;
    for (const LipschitzLayer& l : params.layers) log_sum += std::log(l.bound());
    return std::exp(log_sum);
}

namespace {

struct ForwardTrace {
    std::vector<Eigen::MatrixXd> normalized;  // per layer
    std::vector<Eigen::MatrixXd> pre;         // pre-activations per layer
    std::vector<Eigen::MatrixXd> post;        // post[0] is the input, post[i+1] the output of layer i
    Eigen::RowVectorXd output;
};

void require_finite(const Eigen::MatrixXd& m, std::size_t layer, const char* what)
{
    if (!m.allFinite()) {
        throw NumericError(std::string("non-finite ") + what + " at layer " + std::to_string(layer));
    }
}

ForwardTrace run_forward(const DecoderParams& params, Eigen::MatrixXd input)
{
    ForwardTrace trace;
    const std::size_t n = params.layers.size();
    trace.post.reserve(n + 1);
    trace.post.push_back(std::move(input));
    for (std::size_t i = 0; i < n; ++i) {
        const LipschitzLayer& l = params.layers[i];
        trace.normalized.push_back(lipschitz_normalize(l));
        Eigen::MatrixXd a = trace.normalized.back() * trace.post.back();
        a.colwise() += l.bias;
        require_finite(a, i, "pre-activation");
        if (i + 1 < n) {
            trace.post.push_back(a.cwiseMax(0.0));
        }
        trace.pre.push_back(std::move(a));
    }
    trace.output = params.output_scale * trace.pre.back().row(0).array().tanh();
    return trace;
}

Eigen::MatrixXd assemble_input(const DecoderParams& params, const Eigen::Matrix3Xd& points, const Eigen::MatrixXd& latents)
{
    if (latents.rows() != params.latent_dim || latents.cols() != points.cols()) {
        throw ConfigError("latent block is " + std::to_string(latents.rows()) + "x" + std::to_string(latents.cols()) +
                          ", expected " + std::to_string(params.latent_dim) + "x" + std::to_string(points.cols()));
    }
    const int enc = params.encoding.dim();
    Eigen::MatrixXd input(params.input_dim(), points.cols());
    input.topRows(enc) = positional_encoding(points, params.encoding);
    input.bottomRows(params.latent_dim) = latents;
    return input;
}

Eigen::MatrixXd gather_latents(const SampleBatch& batch, const Eigen::MatrixXd& latents)
{
    if (static_cast<Eigen::Index>(batch.shape_index.size()) != batch.size() || batch.distances.size() != batch.size()) {
        throw ConfigError("sample batch arrays have inconsistent lengths");
    }
    Eigen::MatrixXd per_point(latents.rows(), batch.size());
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        const int s = batch.shape_index[static_cast<std::size_t>(b)];
        if (s < 0 || s >= latents.cols()) throw ConfigError("sample references latent " + std::to_string(s) + " out of range");
        per_point.col(b) = latents.col(s);
    }
    return per_point;
}

LossBreakdown losses_from_output(const DecoderParams& params, const SampleBatch& batch, const Eigen::MatrixXd& per_point_latents,
                                 const Eigen::RowVectorXd& output, const LossConfig& cfg)
{
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    LossBreakdown loss;
    double clip = 0.0;
    double latent = 0.0;
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        clip += training::truncated_l1(output(b), batch.distances(b), cfg.delta);
        latent += per_point_latents.col(b).squaredNorm();
    }
    loss.clip = clip * inv_n;
    loss.latent = latent * inv_n;
    loss.lipschitz = lipschitz_loss(params);
    loss.total = loss.clip + loss.latent + cfg.w_ad * loss.lipschitz;
    if (!std::isfinite(loss.total)) throw NumericError("non-finite loss");
    return loss;
}

} // namespace

double decoder_forward(const DecoderParams& params, const Vec3& x, const Eigen::VectorXd& z)
{
    Eigen::Matrix3Xd points(3, 1);
    points.col(0) = x;
    return decoder_forward(params, points, Eigen::MatrixXd(z))(0);
}

Eigen::VectorXd decoder_forward(const DecoderParams& params, const Eigen::Matrix3Xd& points, const Eigen::MatrixXd& latents)
{
    return run_forward(params, assemble_input(params, points, latents)).output.transpose();
}

Eigen::VectorXd decoder_forward_shared(const DecoderParams& params, const Eigen::Matrix3Xd& points, const Eigen::VectorXd& z)
{
    if (z.size() != params.latent_dim) throw ConfigError("latent has wrong dimension");
    return decoder_forward(params, points, z.replicate(1, points.cols()));
}

bool GradientBundle::all_finite() const
{
    for (const auto& w : weights) if (!w.allFinite()) return false;
    for (const auto& b : biases) if (!b.allFinite()) return false;
    return k.allFinite() && latents.allFinite();
}

LossBreakdown evaluate_loss(const DecoderParams& params, const SampleBatch& batch, const Eigen::MatrixXd& latents,
                            const LossConfig& cfg)
{
    if (batch.size() == 0) throw ConfigError("empty sample batch");
    const Eigen::MatrixXd per_point = gather_latents(batch, latents);
    const ForwardTrace trace = run_forward(params, assemble_input(params, batch.points, per_point));
    return losses_from_output(params, batch, per_point, trace.output, cfg);
}

BackwardResult decoder_backward(const DecoderParams& params, const SampleBatch& batch, const Eigen::MatrixXd& latents,
                                const LossConfig& cfg)
{
    if (batch.size() == 0) throw ConfigError("empty sample batch");
    const Eigen::MatrixXd per_point = gather_latents(batch, latents);
    const ForwardTrace trace = run_forward(params, assemble_input(params, batch.points, per_point));

    BackwardResult result;
    result.loss = losses_from_output(params, batch, per_point, trace.output, cfg);

    const std::size_t n_layers = params.layers.size();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    GradientBundle& g = result.grad;
    g.weights.resize(n_layers);
    g.biases.resize(n_layers);
    g.k = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_layers));
    g.latents = Eigen::MatrixXd::Zero(latents.rows(), latents.cols());

    // output: y = s * tanh(a)
    Eigen::MatrixXd delta(1, batch.size());
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        const double t = std::tanh(trace.pre.back()(0, b));
        const double dy = training::truncated_l1_derivative(trace.output(b), batch.distances(b), cfg.delta) * inv_n;
        delta(0, b) = dy * params.output_scale * (1.0 - t * t);
    }

    for (std::size_t li = n_layers; li-- > 0;) {
        const LipschitzLayer& layer = params.layers[li];
        const Eigen::MatrixXd& input = trace.post[li];
        const Eigen::MatrixXd d_normalized = delta * input.transpose();
        g.biases[li] = delta.rowwise().sum();

        // chain through the row rescale W_hat = W * min(1, c / |W|_1)
        const double bound = layer.bound();
        const double dbound_dk = sigmoid(layer.k);
        Eigen::MatrixXd d_weight = d_normalized;
        double d_k = 0.0;
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            const auto w = layer.weight.row(r);
            const double row_sum = w.cwiseAbs().sum();
            if (!(row_sum > bound)) continue;
            const double gw = d_normalized.row(r).dot(w);
            const double scale = bound / row_sum;
            for (Eigen::Index c = 0; c < w.size(); ++c) {
                const double sign = w(c) > 0.0 ? 1.0 : (w(c) < 0.0 ? -1.0 : 0.0);
                d_weight(r, c) = scale * d_normalized(r, c) - bound / (row_sum * row_sum) * sign * gw;
            }
            d_k += dbound_dk * gw / row_sum;
        }
        g.weights[li] = std::move(d_weight);
        g.k(static_cast<Eigen::Index>(li)) = d_k;

        Eigen::MatrixXd d_input = trace.normalized[li].transpose() * delta;
        require_finite(d_input, li, "gradient");
        if (li > 0) {
            delta = d_input.cwiseProduct((trace.pre[li - 1].array() > 0.0).cast<double>().matrix());
        } else {
            for (Eigen::Index b = 0; b < batch.size(); ++b) {
                g.latents.col(batch.shape_index[static_cast<std::size_t>(b)]) += d_input.col(b).tail(params.latent_dim);
            }
        }
    }

    // |z|^2 averaged per sample, and the weighted Lipschitz product
    for (Eigen::Index b = 0; b < batch.size(); ++b) {
        const int s = batch.shape_index[static_cast<std::size_t>(b)];
        g.latents.col(s) += 2.0 * inv_n * latents.col(s);
    }
    const double lip = result.loss.lipschitz;
    for (std::size_t li = 0; li < n_layers; ++li) {
        const double k = params.layers[li].k;
        g.k(static_cast<Eigen::Index>(li)) += cfg.w_ad * lip * sigmoid(k) / softplus(k);
    }

    if (!g.all_finite()) throw NumericError("non-finite gradient");
    return result;
}

} // namespace shapeopt::neural
