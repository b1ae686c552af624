#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sys/wait.h>

#include "pipeline_fixture.hpp"
#include "shapeopt/error.hpp"
#include "shapeopt/geometry/mesh_io.hpp"
#include "shapeopt/pipeline/archive.hpp"
#include "shapeopt/pipeline/config.hpp"
#include "shapeopt/pipeline/stages.hpp"
#include "shapeopt/training/checkpoint.hpp"
#include "support.hpp"

using namespace shapeopt;
using namespace shapeopt::pipeline;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args)
{
    const std::string line = std::string(SHAPEOPT_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(line.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string open_cube_obj()
{
    return "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n"
           "f 1 4 3\nf 1 3 2\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\nf 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\n";
}

} // namespace

TEST_SUITE("pipeline")
{
    TEST_CASE("config parsing is strict")
    {
        CHECK_NOTHROW((void)parse_config("{}"));
        CHECK_THROWS_AS((void)parse_config("{\"sed\": 1}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("{\"training\": {\"epochs\": \"many\"}}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("{\"training\": {\"epochs\": -3}}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("{\"optimize\": {\"population_size\": 7}}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("{\"objectives\": [{\"name\": \"x\", \"kind\": \"lift\"}]}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("{\"objectives\": [{\"name\": \"x\", \"kind\": \"mass\", \"axis\": \"w\"}]}"), ConfigError);
        CHECK_THROWS_AS((void)parse_config("[1, 2"), ConfigError);
        const RunConfig d = parse_config("{}");
        REQUIRE(d.objectives.size() == 2);
        CHECK(d.objectives[1].direction == objectives::Direction::Maximize);
        CHECK(d.optimize.ga.mutation_probability < 0.0);
    }

    TEST_CASE("echoed configuration parses back to the same configuration")
    {
        testing::TempDir dir;
        const RunConfig a = parse_config(testing::tiny_config(dir / "run"));
        const std::string echo = to_json(a);
        CHECK(to_json(parse_config(echo)) == echo);
        const RunConfig b = parse_config(echo);
        CHECK(b.training.lr_weights == 0.005);
        CHECK(b.dataset.procedural[1].ranges.at("hx") == std::pair<double, double>(0.4, 0.5));
        CHECK(b.objectives[1].raster_resolution == 64);
    }

    TEST_CASE("relative mesh paths resolve against the config file; overrides apply")
    {
        testing::TempDir dir;
        testing::write_text(dir / "c.json", R"({"dataset": {"meshes": ["parts/a.obj"]}, "output_dir": "out"})");
        RunConfig c = load_config(dir / "c.json");
        CHECK(c.dataset.meshes[0] == dir.path() / "parts/a.obj");
        CHECK(c.output_dir == dir.path() / "out");
        Overrides o;
        o.seed = 99;
        o.resolution = 40;
        o.bounds_margin = 0.5;
        apply_overrides(c, o);
        CHECK(c.seed == 99);
        CHECK(c.evaluate.resolution == 40);
        CHECK(c.optimize.bounds_margin == 0.5);
        for (const auto& s : c.objectives) CHECK(s.resolution == 40);
        CHECK_THROWS_AS((void)load_config(dir / "missing.json"), ConfigError);
    }

    TEST_CASE("sample archives round trip exactly")
    {
        testing::TempDir dir;
        geometry::SdfSampleSet s;
        s.shape_id = "a";
        for (int i = 0; i < 5; ++i) {
            s.points.push_back(Vec3::Random());
            s.distances.push_back(std::sin(i + 0.1) / 3.0);
        }
        s.distances[2] = 1.0 / 3.0;
        save_samples(s, dir / "a.json");
        const auto back = load_samples(dir / "a.json");
        CHECK(back.shape_id == "a");
        CHECK(back.points == s.points);
        CHECK(back.distances == s.distances);
        testing::write_text(dir / "b.json", R"({"format": "shapeopt-samples", "version": "2"})");
        CHECK_THROWS_AS((void)load_samples(dir / "b.json"), VersionError);
    }

    TEST_CASE("stages check their inputs")
    {
        testing::TempDir dir;
        const RunConfig cfg = parse_config(testing::tiny_config(dir / "run"));
        CHECK_THROWS_AS(cmd_train(cfg), StageDependencyError);
        CHECK_THROWS_AS((void)cmd_optimize(cfg), StageDependencyError);
        try {
            cmd_reconstruct(cfg);
            CHECK(false);
        } catch (const StageDependencyError& e) {
            CHECK(std::string(e.what()).find("'train'") != std::string::npos);
        }
    }

    TEST_CASE("invalid meshes abort preprocessing unless skipped")
    {
        testing::TempDir dir;
        testing::write_text(dir / "open.obj", open_cube_obj());
        RunConfig cfg = parse_config(testing::tiny_config(dir / "run"));
        cfg.dataset.meshes = {dir / "open.obj"};
        CHECK_THROWS_AS((void)cmd_preprocess(cfg), DataError);
        const auto reports = cmd_preprocess(cfg, {true, nullptr});
        REQUIRE(reports.size() == 3);
        CHECK_FALSE(reports[0].problem.empty());
        CHECK(reports[1].problem.empty());
        CHECK(fs::exists(RunLayout{cfg.output_dir}.sample_index()));
    }

    TEST_CASE("command-line exit codes")
    {
        testing::TempDir dir;
        testing::write_text(dir / "open.obj", open_cube_obj());
        testing::write_text(dir / "tiny.json", testing::tiny_config(dir / "run"));
        std::string with_mesh = testing::tiny_config(dir / "run_mesh");
        with_mesh.replace(with_mesh.find("\"procedural\""), 0, "\"meshes\": [\"open.obj\"],\n    ");
        testing::write_text(dir / "mesh.json", with_mesh);
        testing::write_text(dir / "bad.json", R"({"trainng": {}})");
        std::string hot = testing::tiny_config(dir / "run_hot", 20);
        hot.replace(hot.find("0.005"), 5, "1e300");
        testing::write_text(dir / "hot.json", hot);
        const std::string tiny = "--config " + (dir / "tiny.json").string();

        CHECK(cli("") == 2);
        CHECK(cli("--help") == 0);
        CHECK(cli("train --config " + (dir / "nope.json").string()) == 2);
        CHECK(cli("train --config " + (dir / "bad.json").string()) == 2);
        CHECK(cli("optimize " + tiny) == 3);
        CHECK(cli("preprocess --config " + (dir / "mesh.json").string()) == 3);
        CHECK(cli("preprocess --skip-invalid --config " + (dir / "mesh.json").string()) == 0);
        CHECK(cli("preprocess " + tiny + " --out " + (dir / "run_hot").string()) == 0);
        CHECK(cli("train --config " + (dir / "hot.json").string()) == 4);
        CHECK(fs::exists(dir / "run_hot" / "checkpoints" / "last_good.json"));
        CHECK_FALSE(fs::exists(dir / "run_hot" / "checkpoints" / "model.json"));
    }

    TEST_CASE("a full run writes every artifact and reproduces them bit for bit")
    {
        testing::TempDir dir;
        const auto run_all = [&](const fs::path& out) {
            const RunConfig cfg = parse_config(testing::tiny_config(out));
            cmd_preprocess(cfg);
            cmd_train(cfg);
            cmd_reconstruct(cfg);
            cmd_evaluate(cfg);
            const OptimizeSummary s = cmd_optimize(cfg);
            cmd_export(cfg);
            return s;
        };
        const OptimizeSummary s = run_all(dir / "a");
        run_all(dir / "b");
        CHECK(s.labels == std::vector<std::string>{"mass", "stiffness"});
        CHECK(s.training.size() == 2);
        CHECK(s.result.generations.size() == 2);
        for (const char* f : {"samples/summary.csv", "checkpoints/loss.csv", "meshes/reconstruction.csv", "report.csv",
                              "report_shapes.csv", "generations.csv", "fronts/front.csv", "fronts/training.csv", "latents.csv"}) {
            CHECK_MESSAGE(fs::exists(dir / "a" / f), f);
        }
        const auto ck = training::load_checkpoint(dir / "a" / "checkpoints" / "model.json");
        CHECK(ck.latents.size() == 2);
        const std::string report = testing::read_text(dir / "a" / "report.csv");
        CHECK(report.rfind("metric,value,value_x1e3\n", 0) == 0);
        CHECK(report.find("\ncov,") != std::string::npos);

        const auto a = testing::csv_files(dir / "a");
        const auto b = testing::csv_files(dir / "b");
        CHECK(a.size() >= 9);
        CHECK(a == b);
    }
}
