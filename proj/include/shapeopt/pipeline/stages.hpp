#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "shapeopt/evolution/nsga2.hpp"
#include "shapeopt/pipeline/config.hpp"

namespace shapeopt::pipeline {

/// Fixed paths inside one run directory.
struct RunLayout {
    std::filesystem::path root;

    [[nodiscard]] std::filesystem::path samples() const { return root / "samples"; }
    [[nodiscard]] std::filesystem::path sample_index() const { return samples() / "index.json"; }
    [[nodiscard]] std::filesystem::path checkpoints() const { return root / "checkpoints"; }
    [[nodiscard]] std::filesystem::path model() const { return checkpoints() / "model.json"; }
    [[nodiscard]] std::filesystem::path last_good() const { return checkpoints() / "last_good.json"; }
    [[nodiscard]] std::filesystem::path meshes() const { return root / "meshes"; }
    [[nodiscard]] std::filesystem::path input_meshes() const { return meshes() / "input"; }
    [[nodiscard]] std::filesystem::path fronts() const { return root / "fronts"; }
    [[nodiscard]] std::filesystem::path report() const { return root / "report.csv"; }
    [[nodiscard]] std::filesystem::path resolved_config() const { return root / "resolved_config.json"; }
};

struct StageOptions {
    bool skip_invalid = false;
    std::ostream* log = nullptr;  // progress lines; nullptr silences them
};

struct ShapeReport {
    std::string id;
    std::string source;
    bool watertight = false;
    std::size_t vertices = 0;
    std::size_t faces = 0;
    std::size_t samples = 0;
    std::string problem;  // empty when the shape was accepted
};

struct OptimizeSummary {
    std::vector<std::string> labels;                // user-facing objective names
    evolution::NsgaResult result;                   // objectives in minimization form
    std::vector<evolution::Evaluation> training;    // one per training code, minimization form
};

/// Loads or generates the dataset, validates, normalizes, and writes one sample archive per shape.
/// Invalid shapes abort the run with DataError unless options.skip_invalid.
std::vector<ShapeReport> cmd_preprocess(const RunConfig& cfg, const StageOptions& options = {});
/// Trains on the sample archives; writes checkpoints/model.json and the loss history.
/// On divergence the last good state goes to checkpoints/last_good.json before the error propagates.
void cmd_train(const RunConfig& cfg, const StageOptions& options = {});
/// Extracts a mesh for every trained code.
void cmd_reconstruct(const RunConfig& cfg, const StageOptions& options = {});
/// Chamfer distance of each reconstruction to its input shape, plus MMD and coverage; writes report.csv.
void cmd_evaluate(const RunConfig& cfg, const StageOptions& options = {});
/// NSGA-II over the latent space; writes generations.csv, fronts/front.csv and front meshes.
OptimizeSummary cmd_optimize(const RunConfig& cfg, const StageOptions& options = {});
/// Writes latents.csv and one mesh per trained code.
void cmd_export(const RunConfig& cfg, const StageOptions& options = {});

} // namespace shapeopt::pipeline
