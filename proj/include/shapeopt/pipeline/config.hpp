#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shapeopt/evolution/nsga2.hpp"
#include "shapeopt/geometry/procedural.hpp"
#include "shapeopt/geometry/sdf_sampling.hpp"
#include "shapeopt/neural/decoder.hpp"
#include "shapeopt/objectives/objectives.hpp"
#include "shapeopt/training/trainer.hpp"

namespace shapeopt::pipeline {

struct DatasetConfig {
    std::vector<std::filesystem::path> meshes;  // relative paths resolve against the config file
    std::vector<geometry::ProceduralFamilySpec> procedural;
    std::size_t samples_per_shape = 15000;
    double normalize_radius = 0.9;
    geometry::SdfSamplingConfig sampling;
};

struct OptimizeConfig {
    evolution::GaConfig ga;  // its seed is derived from RunConfig::seed
    double bounds_margin = 0.2;
    bool export_front_meshes = true;
};

struct EvaluateConfig {
    int resolution = 64;            // marching cubes for reconstruct, evaluate and export
    std::size_t points = 20000;     // surface samples per cloud; identical for every cloud
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "run";
    DatasetConfig dataset;
    neural::ArchitectureConfig architecture;
    training::TrainConfig training;  // its seed is derived from RunConfig::seed
    OptimizeConfig optimize;
    std::vector<objectives::ObjectiveSpec> objectives;
    EvaluateConfig evaluate;

    void validate() const;
};

/// Command-line overrides applied on top of the file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
    std::optional<double> bounds_margin;
    std::optional<int> resolution;  // every marching-cubes extraction, objectives included
};

/// Strict JSON: unknown keys and wrongly typed values raise ConfigError. Missing keys take defaults.
[[nodiscard]] RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

void apply_overrides(RunConfig& cfg, const Overrides& overrides);

/// Every field with its effective value, as JSON. parse_config(to_json(c)) reproduces c.
[[nodiscard]] std::string to_json(const RunConfig& cfg);

/// Stage seeds derived from the run seed.
namespace seed_stream {
inline constexpr std::uint64_t procedural = 1;
inline constexpr std::uint64_t sampling = 2;
inline constexpr std::uint64_t training = 3;
inline constexpr std::uint64_t optimize = 4;
inline constexpr std::uint64_t metrics = 5;
} // namespace seed_stream

} // namespace shapeopt::pipeline
