#include "shapeopt/training/trainer.hpp"

#include <cmath>
#include <string>

namespace shapeopt::training {

void TrainConfig::validate() const
{
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr_weights > 0.0) || !(lr_latents > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    if (!(w_ad >= 0.0)) throw ConfigError("w_ad must be non-negative");
    if (!(latent_init_std >= 0.0)) throw ConfigError("latent_init_std must be non-negative");
}

namespace {

/// Adam moments for one parameter block.
struct AdamSlot {
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;

    template <typename Param, typename Grad>
    void step(Param& param, const Grad& grad, double lr, int t)
    {
        constexpr double beta1 = 0.9;
        constexpr double beta2 = 0.999;
        constexpr double eps = 1e-8;
        if (m.size() == 0) {
            m = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
            v = Eigen::MatrixXd::Zero(grad.rows(), grad.cols());
        }
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1, t);
        const double c2 = 1.0 - std::pow(beta2, t);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

} // namespace

TrainResult train(const std::vector<geometry::SdfSampleSet>& dataset, const TrainConfig& cfg,
                  const neural::ArchitectureConfig& arch, const StepObserver& observer)
{
    cfg.validate();
    if (dataset.size() < 2) throw DataError("training needs at least two shapes, got " + std::to_string(dataset.size()));
    for (const auto& set : dataset) {
        if (set.size() == 0 || set.points.size() != set.distances.size()) {
            throw DataError("sample set '" + set.shape_id + "' is empty or inconsistent");
        }
    }

    Rng rng(cfg.seed);
    neural::ArchitectureConfig resolved = arch;
    resolved.output_scale = cfg.delta;

    TrainResult state;
    state.decoder = neural::init_decoder(resolved, rng);
    state.latents.dim = arch.latent_dim;
    std::normal_distribution<double> init(0.0, cfg.latent_init_std);
    for (const auto& set : dataset) {
        Eigen::VectorXd z(arch.latent_dim);
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = cfg.latent_init_std > 0.0 ? init(rng) : 0.0;
        state.latents.ids.push_back(set.shape_id);
        state.latents.codes.push_back(z);
    }

    const std::size_t n_layers = state.decoder.layers.size();
    std::vector<AdamSlot> w_slots(n_layers), b_slots(n_layers);
    AdamSlot k_slot;
    AdamSlot z_slot;
    Eigen::MatrixXd latents = state.latents.as_matrix();

    // batch layout is fixed; only the drawn indices change per epoch
    const auto per_shape = static_cast<Eigen::Index>(cfg.batch_size);
    neural::SampleBatch batch;
    Eigen::Index total = 0;
    for (const auto& set : dataset) total += std::min<Eigen::Index>(per_shape, static_cast<Eigen::Index>(set.size()));
    batch.points.resize(3, total);
    batch.distances.resize(total);
    batch.shape_index.resize(static_cast<std::size_t>(total));

    const neural::LossConfig loss_cfg = cfg.loss_config();
    // last state whose loss was finite, handed back if a later step diverges
    TrainResult last_good = state;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Eigen::Index col = 0;
        for (std::size_t s = 0; s < dataset.size(); ++s) {
            const auto& set = dataset[s];
            const auto n = static_cast<Eigen::Index>(set.size());
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            const Eigen::Index take = std::min(per_shape, n);
            for (Eigen::Index i = 0; i < take; ++i, ++col) {
                const Eigen::Index src = take == n ? i : pick(rng);
                batch.points.col(col) = set.points[static_cast<std::size_t>(src)];
                batch.distances(col) = set.distances[static_cast<std::size_t>(src)];
                batch.shape_index[static_cast<std::size_t>(col)] = static_cast<int>(s);
            }
        }

        neural::BackwardResult step;
        try {
            step = neural::decoder_backward(state.decoder, batch, latents, loss_cfg);
        } catch (const NumericError& e) {
            throw TrainingDiverged(std::string("training diverged at epoch ") + std::to_string(epoch) + ": " + e.what(),
                                   std::move(last_good), epoch);
        }
        state.history.push_back(step.loss);
        last_good = state;

        const int t = epoch + 1;
        Eigen::VectorXd ks(static_cast<Eigen::Index>(n_layers));
        for (std::size_t l = 0; l < n_layers; ++l) {
            auto& layer = state.decoder.layers[l];
            w_slots[l].step(layer.weight, step.grad.weights[l], cfg.lr_weights, t);
            b_slots[l].step(layer.bias, step.grad.biases[l], cfg.lr_weights, t);
            ks(static_cast<Eigen::Index>(l)) = layer.k;
        }
        k_slot.step(ks, step.grad.k, cfg.lr_weights, t);
        for (std::size_t l = 0; l < n_layers; ++l) state.decoder.layers[l].k = ks(static_cast<Eigen::Index>(l));
        z_slot.step(latents, step.grad.latents, cfg.lr_latents, t);
        for (std::size_t s = 0; s < dataset.size(); ++s) state.latents.codes[s] = latents.col(static_cast<Eigen::Index>(s));

        if (observer) observer(epoch, state.decoder, state.latents);
    }
    return state;
}

} // namespace shapeopt::training
