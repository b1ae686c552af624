#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shapeopt/geometry/sdf_sampling.hpp"
#include "shapeopt/error.hpp"
#include "shapeopt/latent/latent.hpp"
#include "shapeopt/neural/decoder.hpp"

namespace shapeopt::training {

struct TrainConfig {
    int epochs = 8000;        // one epoch = one optimizer step over a batch from every shape
    int batch_size = 1024;    // samples per shape per step
    double lr_weights = 5e-4; // Adam step for W, b and k
    double lr_latents = 1e-3;
    double delta = 0.1;       // clip band; also the decoder output scale
    double w_ad = 1e-7;
    double latent_init_std = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
    [[nodiscard]] neural::LossConfig loss_config() const { return {delta, w_ad}; }
};

struct TrainResult {
    neural::DecoderParams decoder;
    latent::LatentBank latents;
    std::vector<neural::LossBreakdown> history;  // loss of each epoch's batch before its update
};

/// Called after every optimizer step with the epoch index and updated state.
using StepObserver = std::function<void(int epoch, const neural::DecoderParams&, const latent::LatentBank&)>;

/// Raised when a step produces a non-finite loss or gradient; carries the state before that step.
class TrainingDiverged : public NumericError {
public:
    TrainingDiverged(const std::string& what, TrainResult last_good, int epoch)
        : NumericError(what), last_good_(std::move(last_good)), epoch_(epoch)
    {
    }
    [[nodiscard]] const TrainResult& last_good() const { return last_good_; }
    [[nodiscard]] int epoch() const { return epoch_; }

private:
    TrainResult last_good_;
    int epoch_;
};

/// Auto-decoder training: decoder weights and one latent per shape are optimized jointly.
/// Latents start from N(0, latent_init_std^2). The architecture's output scale is replaced by
/// cfg.delta. Needs at least two non-empty sample sets; deterministic for a fixed seed.
[[nodiscard]] TrainResult train(const std::vector<geometry::SdfSampleSet>& dataset, const TrainConfig& cfg,
                                const neural::ArchitectureConfig& arch, const StepObserver& observer = {});

} // namespace shapeopt::training
