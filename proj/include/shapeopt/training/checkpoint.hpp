#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shapeopt/latent/latent.hpp"
#include "shapeopt/neural/decoder.hpp"
#include "shapeopt/training/trainer.hpp"

namespace shapeopt::training {

inline constexpr const char* checkpoint_format = "shapeopt-checkpoint";
inline constexpr const char* checkpoint_version = "1";

struct Checkpoint {
    neural::DecoderParams decoder;
    latent::LatentBank latents;
    TrainConfig config;
    int epoch = 0;  // completed epochs
    std::vector<neural::LossBreakdown> history;
};

/// JSON document with a version string, config echo, and row-major flat arrays.
/// Doubles are written in shortest round-trip form, so load(save(x)) == x exactly.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws VersionError on a version mismatch and FormatError on anything malformed.
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace shapeopt::training
