#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shapeopt/error.hpp"
#include "shapeopt/pipeline/config.hpp"
#include "shapeopt/pipeline/stages.hpp"

namespace {

using namespace shapeopt;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> bounds_margin;
    std::optional<int> resolution;
    bool skip_invalid = false;
};

void add_common(CLI::App* cmd, Options& o)
{
    cmd->add_option("--config", o.config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Override the run seed");
    cmd->add_option("--out", o.out, "Override the output directory");
    cmd->add_option("--bounds-margin", o.bounds_margin, "Search-box margin around the trained codes, as a fraction of their range");
    cmd->add_option("--resolution", o.resolution, "Marching-cubes resolution for every extraction");
    cmd->add_flag("--skip-invalid", o.skip_invalid, "Skip invalid input meshes instead of aborting");
}

int run(const Options& o, const std::function<void(const pipeline::RunConfig&, const pipeline::StageOptions&)>& stage)
{
    pipeline::RunConfig cfg = pipeline::load_config(o.config);
    pipeline::Overrides overrides;
    overrides.seed = o.seed;
    if (o.out) overrides.output_dir = *o.out;
    overrides.bounds_margin = o.bounds_margin;
    overrides.resolution = o.resolution;
    pipeline::apply_overrides(cfg, overrides);
    stage(cfg, {o.skip_invalid, &std::cerr});
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Latent-space shape optimization: SDF auto-decoder training and NSGA-II search"};
    app.require_subcommand(1);
    Options o;

    using Stage = std::function<void(const pipeline::RunConfig&, const pipeline::StageOptions&)>;
    const std::vector<std::tuple<std::string, std::string, Stage>> stages = {
        {"preprocess", "Validate, normalize and sample the dataset", [](const auto& c, const auto& s) { pipeline::cmd_preprocess(c, s); }},
        {"train", "Train the decoder and latent codes", [](const auto& c, const auto& s) { pipeline::cmd_train(c, s); }},
        {"reconstruct", "Extract a mesh for every trained code", [](const auto& c, const auto& s) { pipeline::cmd_reconstruct(c, s); }},
        {"evaluate", "Chamfer distance, MMD and coverage of the reconstructions", [](const auto& c, const auto& s) { pipeline::cmd_evaluate(c, s); }},
        {"optimize", "Multi-objective search over the latent space", [](const auto& c, const auto& s) { (void)pipeline::cmd_optimize(c, s); }},
        {"export", "Write latent codes and their meshes", [](const auto& c, const auto& s) { pipeline::cmd_export(c, s); }},
        {"run", "All stages in order", [](const auto& c, const auto& s) {
             pipeline::cmd_preprocess(c, s);
             pipeline::cmd_train(c, s);
             pipeline::cmd_reconstruct(c, s);
             pipeline::cmd_evaluate(c, s);
             (void)pipeline::cmd_optimize(c, s);
             pipeline::cmd_export(c, s);
         }},
    };
    std::vector<std::pair<CLI::App*, Stage>> commands;
    for (const auto& [name, help, stage] : stages) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, o);
        commands.emplace_back(cmd, stage);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (const auto& [cmd, stage] : commands) {
            if (cmd->parsed()) return run(o, stage);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
