#include <doctest.h>

#include <cmath>
#include <numbers>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/mesh.hpp"
#include "shapeopt/geometry/procedural.hpp"
#include "shapeopt/geometry/sdf_sampling.hpp"
#include "shapeopt/objectives/objectives.hpp"
#include "shapeopt/training/reconstruct.hpp"
#include "shapeopt/training/trainer.hpp"
#include "support.hpp"

using namespace shapeopt;
using namespace shapeopt::objectives;
using geometry::Axis;
using testing::box;

namespace {

constexpr double four_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;

geometry::TriMesh scaled(geometry::TriMesh m, double s)
{
    for (Vec3& v : m.vertices) v *= s;
    return m;
}

ObjectiveSpec spec_of(ObjectiveKind kind, std::string name)
{
    ObjectiveSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.direction = default_direction(kind);
    return s;
}

} // namespace

TEST_SUITE("objectives")
{
    TEST_CASE("stiffness from frequency")
    {
        CHECK(stiffness_from_frequency(1.0, 1.0) == doctest::Approx(four_pi_sq).epsilon(1e-15));
        CHECK(stiffness_from_frequency(2.0, 0.5) == doctest::Approx(four_pi_sq * 0.5).epsilon(1e-15));
        CHECK(stiffness_from_frequency(1.0, 0.0) == 0.0);
        CHECK_THROWS_AS((void)stiffness_from_frequency(0.0, 1.0), DataError);
        CHECK_THROWS_AS((void)stiffness_from_frequency(1.0, -1.0), DataError);
    }

    TEST_CASE("mass is density times volume")
    {
        const auto cube = testing::unit_cube();
        CHECK(mass_of(cube, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mass_of(cube, 2.5) == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(mass_of(cube, 0.0) == 0.0);
    }

    TEST_CASE("stiffness proxy is 4 pi^2 rho J for a rectangular silhouette")
    {
        const auto m = box(Vec3(-0.3, -0.2, -0.5), Vec3(0.3, 0.2, 0.5));
        const double j = 0.6 * 0.4 * (0.36 + 0.16) / 12.0;
        CHECK(stiffness_proxy(m, 1.0, Axis::Z, 512) == doctest::Approx(four_pi_sq * j).epsilon(0.02).scale(0.0));
        CHECK(stiffness_proxy(m, 3.0, Axis::Z, 512) == doctest::Approx(3.0 * stiffness_proxy(m, 1.0, Axis::Z, 512)));
    }

    TEST_CASE("a wider section is stiffer than a slender one of equal volume")
    {
        const auto wide = box(Vec3(-0.5, -0.5, -0.25), Vec3(0.5, 0.5, 0.25));
        const auto slender = box(Vec3(-0.25, -0.25, -0.5), Vec3(0.25, 0.25, 0.5));
        REQUIRE(geometry::mesh_volume(wide) == doctest::Approx(2.0 * geometry::mesh_volume(slender)));
        const auto slender2 = box(Vec3(-0.25, -0.25, -0.9), Vec3(0.25, 0.25, 0.9));
        CHECK(stiffness_proxy(wide, 1.0, Axis::Z, 256) > stiffness_proxy(slender2, 1.0, Axis::Z, 256));
    }

    TEST_CASE("stiffness proxy scales with the fourth power of size")
    {
        const auto m = geometry::make_torus(0.4, 0.15, 48, 24);
        const double k1 = stiffness_proxy(m, 1.0, Axis::Z, 512);
        const double k2 = stiffness_proxy(scaled(m, 1.5), 1.0, Axis::Z, 512);
        CHECK(k2 / k1 == doctest::Approx(std::pow(1.5, 4)).epsilon(0.02).scale(0.0));
    }

    TEST_CASE("drag proxy is the frontal area")
    {
        const auto sphere = geometry::make_icosphere(0.5, 5);
        const auto cube = box(Vec3::Constant(-0.5), Vec3::Constant(0.5));
        CHECK(drag_proxy(cube, Axis::Z, 256) == doctest::Approx(1.0).epsilon(0.01).scale(0.0));
        CHECK(drag_proxy(sphere, Axis::Z, 512) / drag_proxy(cube, Axis::Z, 512) == doctest::Approx(std::numbers::pi / 4).epsilon(0.02).scale(0.0));
        const auto slab = box(Vec3(-0.2, -0.4, -0.6), Vec3(0.2, 0.4, 0.6));
        const double ax = drag_proxy(slab, Axis::X, 256), ay = drag_proxy(slab, Axis::Y, 256), az = drag_proxy(slab, Axis::Z, 256);
        CHECK(ax == doctest::Approx(0.96).epsilon(0.02).scale(0.0));
        CHECK(ay == doctest::Approx(0.48).epsilon(0.02).scale(0.0));
        CHECK(az == doctest::Approx(0.32).epsilon(0.02).scale(0.0));
    }

    TEST_CASE("kind parsing and defaults")
    {
        CHECK(parse_kind("mass") == ObjectiveKind::Mass);
        CHECK(parse_kind("external") == ObjectiveKind::External);
        CHECK(to_string(ObjectiveKind::Drag) == "drag");
        CHECK_THROWS_AS((void)parse_kind("lift"), ConfigError);
        CHECK(default_direction(ObjectiveKind::Stiffness) == Direction::Maximize);
        CHECK(default_direction(ObjectiveKind::Mass) == Direction::Minimize);
        ObjectiveSpec ext = spec_of(ObjectiveKind::External, "ext");
        CHECK_THROWS_AS(ext.validate(), ConfigError);
        ObjectiveSpec low = spec_of(ObjectiveKind::Mass, "m");
        low.resolution = 4;
        CHECK_THROWS_AS(low.validate(), ConfigError);
    }

    TEST_CASE("external evaluators")
    {
        testing::TempDir dir;
        const auto script = [&](const std::string& name, const std::string& body) {
            testing::write_text(dir / name, "#!/bin/sh\n" + body + "\n");
            return "sh " + (dir / name).string();
        };
        const auto cube = testing::unit_cube();
        std::vector<double> values;
        CHECK(run_external(script("two.sh", "test -s \"$1\" || exit 9\necho 1.5\necho -2e-3"), cube, 2, values));
        CHECK(values == std::vector<double>{1.5, -2e-3});
        CHECK_FALSE(run_external(script("fail.sh", "echo 1\nexit 3"), cube, 1, values));
        CHECK(values.empty());
        CHECK_FALSE(run_external(script("text.sh", "echo abc"), cube, 1, values));
        CHECK_FALSE(run_external(script("short.sh", "echo 1"), cube, 2, values));
        const std::string lines = script("lines.sh", "grep -c '^f ' \"$1\"");
        REQUIRE(run_external(lines, cube, 1, values));
        CHECK(values[0] == static_cast<double>(cube.faces.size()));

        ObjectiveSpec ext = spec_of(ObjectiveKind::External, "cfd");
        ext.command = script("pair.sh", "echo 4\necho 5");
        ext.count = 2;
        ext.direction = Direction::Maximize;
        Rng rng(1);
        neural::ArchitectureConfig arch;
        const ObjectiveSet set(neural::init_decoder(arch, rng), {spec_of(ObjectiveKind::Mass, "mass"), ext});
        CHECK(set.labels() == std::vector<std::string>{"mass", "cfd_0", "cfd_1"});
        const auto e = set.evaluate_mesh(cube);
        REQUIRE(e.feasible);
        REQUIRE(e.objectives.size() == 3);
        CHECK(e.objectives[0] == doctest::Approx(1.0));
        CHECK(e.objectives[1] == -4.0);
        CHECK(e.objectives[2] == -5.0);
        CHECK(set.user_facing(e.objectives)[2] == 5.0);
    }

    TEST_CASE("objective vectors of meshes; maximized objectives are negated once")
    {
        Rng rng(1);
        neural::ArchitectureConfig arch;
        const ObjectiveSet set(neural::init_decoder(arch, rng),
                               {spec_of(ObjectiveKind::Mass, "mass"), spec_of(ObjectiveKind::Stiffness, "stiffness")});
        const auto cube = testing::unit_cube();
        const auto e = set.evaluate_mesh(cube);
        REQUIRE(e.feasible);
        CHECK(e.objectives[0] == doctest::Approx(1.0));
        CHECK(e.objectives[1] == doctest::Approx(-stiffness_proxy(cube, 1.0, Axis::Z, 256)));
        CHECK(set.user_facing(e.objectives)[1] == -e.objectives[1]);
        CHECK_FALSE(set.evaluate_mesh(geometry::TriMesh{}).feasible);
        CHECK_THROWS_AS((void)set.evaluate(Eigen::VectorXd::Zero(3)), ConfigError);
    }

    TEST_CASE("decoded genomes: a trained code is feasible, a surface-free decoder is not")
    {
        const auto sphere = geometry::center_and_normalize(geometry::make_icosphere(1.0, 3), 0.8);
        const auto cube = geometry::center_and_normalize(testing::unit_cube(), 0.8);
        const std::vector<geometry::SdfSampleSet> data{geometry::sample_sdf(sphere, 8000, 1, {}, "sphere"),
                                                       geometry::sample_sdf(cube, 8000, 2, {}, "cube")};
        neural::ArchitectureConfig arch;
        arch.latent_dim = 1;
        arch.hidden_layers = 3;
        arch.hidden_width = 48;
        arch.encoding.levels = 4;
        training::TrainConfig cfg;
        cfg.epochs = 1500;
        cfg.batch_size = 1024;
        cfg.lr_weights = 5e-3;
        cfg.lr_latents = 1e-2;
        const auto trained = training::train(data, cfg, arch);

        ObjectiveSpec mass = spec_of(ObjectiveKind::Mass, "mass");
        mass.resolution = 48;
        const ObjectiveSet set(trained.decoder, {mass});
        const auto e = set.evaluate(trained.latents.codes[1]);
        REQUIRE(e.feasible);
        const auto recon = training::reconstruct(trained.decoder, trained.latents.codes[1], 48);
        CHECK(e.objectives[0] == geometry::mesh_volume(recon));
        CHECK(e.objectives[0] == doctest::Approx(geometry::mesh_volume(cube)).epsilon(0.05).scale(0.0));

        auto empty = trained.decoder;
        empty.layers.back().bias.setConstant(50.0);
        const ObjectiveSet none(empty, {mass});
        CHECK_FALSE(none.evaluate(trained.latents.codes[0]).feasible);
    }
}
