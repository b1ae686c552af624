#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "support.hpp"

namespace testing {

/// Small but complete run configuration: one sphere and one box, a tiny decoder and search.
inline std::string tiny_config(const std::filesystem::path& out, int epochs = 400, const std::string& extra_training = {})
{
    return R"({
  "seed": 11,
  "output_dir": ")" + out.string() + R"(",
  "dataset": {
    "procedural": [
      {"family": "sphere", "count": 1, "ranges": {"radius": 0.8, "subdivisions": 3}},
      {"family": "box", "count": 1, "ranges": {"hx": [0.4, 0.5], "hy": 0.5, "hz": 0.3}}
    ],
    "samples_per_shape": 2000
  },
  "architecture": {"latent_dim": 1, "hidden_layers": 2, "hidden_width": 16, "encoding_levels": 2},
  "training": {"epochs": )" + std::to_string(epochs) + R"(, "batch_size": 128, "lr_weights": 0.005, "lr_latents": 0.01)" +
           extra_training + R"(},
  "optimize": {"population_size": 4, "generations": 2},
  "objectives": [
    {"name": "mass", "kind": "mass"},
    {"name": "stiffness", "kind": "stiffness", "resolution": 24, "raster_resolution": 64}
  ],
  "evaluate": {"resolution": 24, "points": 500}
})";
}

/// Contents of every CSV below `root`, keyed by relative path.
inline std::map<std::string, std::string> csv_files(const std::filesystem::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") {
            out[std::filesystem::relative(e.path(), root).string()] = read_text(e.path());
        }
    }
    return out;
}

} // namespace testing
