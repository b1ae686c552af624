#include <doctest.h>

#include <cmath>
#include <random>

#include "shapeopt/error.hpp"
#include "shapeopt/geometry/mesh.hpp"
#include "shapeopt/geometry/procedural.hpp"
#include "shapeopt/geometry/sdf_sampling.hpp"
#include "shapeopt/training/checkpoint.hpp"
#include "shapeopt/training/loss.hpp"
#include "shapeopt/training/reconstruct.hpp"
#include "shapeopt/training/trainer.hpp"
#include "support.hpp"

using namespace shapeopt;
using namespace shapeopt::training;

namespace {

std::vector<geometry::SdfSampleSet> toy_dataset(std::size_t n = 2000)
{
    const auto sphere = geometry::center_and_normalize(geometry::make_icosphere(1.0, 3), 0.8);
    const auto box = geometry::center_and_normalize(geometry::make_box(Vec3(0.5, 0.4, 0.3)), 0.8);
    return {geometry::sample_sdf(sphere, n, 1, {}, "sphere"), geometry::sample_sdf(box, n, 2, {}, "box")};
}

neural::ArchitectureConfig toy_arch()
{
    neural::ArchitectureConfig a;
    a.latent_dim = 1;
    a.hidden_layers = 2;
    a.hidden_width = 16;
    a.encoding.levels = 2;
    return a;
}

TrainConfig toy_config(int epochs)
{
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 128;
    c.lr_weights = 5e-3;
    c.lr_latents = 1e-2;
    c.seed = 9;
    return c;
}

} // namespace

TEST_SUITE("training")
{
    TEST_CASE("truncated L1 hand cases")
    {
        CHECK(truncated_l1(0.05, 0.02, 0.1) == doctest::Approx(0.03).epsilon(1e-12));
        CHECK(truncated_l1(0.2, 0.5, 0.1) == 0.0);
        CHECK(truncated_l1(-0.3, -0.5, 0.1) == 0.0);
        CHECK(truncated_l1(0.05, -0.5, 0.1) == doctest::Approx(0.15).epsilon(1e-12));
    }

    TEST_CASE("truncated L1 at the band edge uses the in-band branch")
    {
        CHECK(truncated_l1(0.3, 0.1, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(truncated_l1(-0.3, -0.1, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
        // the outer branches agree with the middle one at the edge whenever the prediction is inside the band
        CHECK(truncated_l1(0.04, 0.1, 0.1) == doctest::Approx(0.1 - 0.04).epsilon(1e-12));
    }

    TEST_CASE("truncated L1 is non-negative and continuous in the prediction")
    {
        const double delta = 0.1;
        for (double gt = -0.5; gt <= 0.5; gt += 0.0125) {
            double prev = truncated_l1(-0.5, gt, delta);
            for (double pred = -0.5; pred <= 0.5; pred += 1e-4) {
                const double v = truncated_l1(pred, gt, delta);
                CHECK(v >= 0.0);
                CHECK(std::abs(v - prev) <= 1e-4 + 1e-12);
                prev = v;
            }
        }
    }

    TEST_CASE("truncated L1 is zero exactly on the correct side or at the target")
    {
        CHECK(truncated_l1(0.02, 0.02, 0.1) == 0.0);
        CHECK(truncated_l1(0.1, 0.3, 0.1) == 0.0);
        CHECK(truncated_l1(0.099, 0.3, 0.1) > 0.0);
        CHECK(truncated_l1(-0.1, -0.3, 0.1) == 0.0);
    }

    TEST_CASE("derivative matches the slope away from kinks")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        for (int i = 0; i < 1000; ++i) {
            const double pred = u(rng), gt = u(rng), h = 1e-7;
            const double num = (truncated_l1(pred + h, gt, 0.1) - truncated_l1(pred - h, gt, 0.1)) / (2 * h);
            const double an = truncated_l1_derivative(pred, gt, 0.1);
            if (std::abs(pred - gt) > 1e-5 && std::abs(std::abs(pred) - 0.1) > 1e-5) CHECK(an == doctest::Approx(num).epsilon(1e-5));
        }
    }

    TEST_CASE("total loss components")
    {
        Rng rng(1);
        neural::ArchitectureConfig arch = toy_arch();
        arch.latent_dim = 3;
        neural::DecoderParams p = neural::init_decoder(arch, rng);
        const Eigen::Matrix3Xd pts = Eigen::Matrix3Xd::Random(3, 20);

        SUBCASE("zero network, zero latent, zero targets leaves only the Lipschitz term")
        {
            for (auto& l : p.layers) {
                l.weight.setZero();
                l.bias.setZero();
                l.k = 0.0;
            }
            const auto r = total_loss(p, Eigen::VectorXd::Zero(3), pts, Eigen::VectorXd::Zero(20), {0.1, 1e-7});
            CHECK(r.clip == 0.0);
            CHECK(r.latent == 0.0);
            CHECK(r.total == doctest::Approx(1e-7 * std::pow(std::log(2.0), 3)).epsilon(1e-12));
        }
        SUBCASE("unit latent adds exactly one")
        {
            for (auto& l : p.layers) {
                l.weight.setZero();
                l.bias.setZero();
            }
            Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
            z(0) = 1.0;
            const auto r = total_loss(p, z, pts, Eigen::VectorXd::Zero(20), {0.1, 0.0});
            CHECK(r.latent == 1.0);
            CHECK(r.total == 1.0);
        }
        SUBCASE("without the Lipschitz weight the total is clip plus latent exactly")
        {
            const Eigen::VectorXd z = Eigen::VectorXd::Constant(3, 0.2);
            const Eigen::VectorXd d = Eigen::VectorXd::Random(20) * 0.2;
            const auto r = total_loss(p, z, pts, d, {0.1, 0.0});
            CHECK(r.total == r.clip + r.latent);
            const auto zero = total_loss(p, Eigen::VectorXd::Zero(3), pts, d, {0.1, 0.0});
            double mean = 0.0;
            for (int i = 0; i < 20; ++i) mean += truncated_l1(neural::decoder_forward(p, Vec3(pts.col(i)), Eigen::VectorXd::Zero(3)), d(i), 0.1);
            CHECK(zero.total == doctest::Approx(mean / 20.0).epsilon(1e-14));
        }
    }

    TEST_CASE("training needs two non-empty shapes and valid settings")
    {
        auto data = toy_dataset(200);
        CHECK_THROWS_AS((void)train({}, toy_config(2), toy_arch()), DataError);
        CHECK_THROWS_AS((void)train({data[0]}, toy_config(2), toy_arch()), DataError);
        auto broken = data;
        broken[1].points.clear();
        broken[1].distances.clear();
        CHECK_THROWS_AS((void)train(broken, toy_config(2), toy_arch()), DataError);
        TrainConfig bad = toy_config(2);
        bad.delta = 0.0;
        CHECK_THROWS_AS((void)train(data, bad, toy_arch()), ConfigError);
    }

    TEST_CASE("training is deterministic, keeps row bounds after every step and reduces the loss")
    {
        const auto data = toy_dataset();
        int violations = 0;
        int steps = 0;
        const auto observer = [&](int, const neural::DecoderParams& p, const latent::LatentBank&) {
            ++steps;
            for (const auto& layer : p.layers) {
                if (neural::lipschitz_normalize(layer).cwiseAbs().rowwise().sum().maxCoeff() > layer.bound() + 1e-9) ++violations;
            }
        };
        const TrainResult a = train(data, toy_config(150), toy_arch(), observer);
        const TrainResult b = train(data, toy_config(150), toy_arch());
        CHECK(steps == 150);
        CHECK(violations == 0);
        REQUIRE(a.history.size() == 150);
        for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].total == b.history[i].total);
        CHECK(a.latents.codes == b.latents.codes);
        double first = 0.0, last = 0.0;
        for (int i = 0; i < 10; ++i) {
            first += a.history[static_cast<std::size_t>(i)].total;
            last += a.history[a.history.size() - 1 - static_cast<std::size_t>(i)].total;
        }
        CHECK(last < first);
        CHECK(a.decoder.output_scale == 0.1);
        CHECK(a.latents.ids == std::vector<std::string>{"sphere", "box"});
    }

    TEST_CASE("divergence reports the last finite state")
    {
        const auto data = toy_dataset(300);
        TrainConfig c = toy_config(50);
        c.lr_weights = 1e300;
        try {
            (void)train(data, c, toy_arch());
            FAIL("expected divergence");
        } catch (const TrainingDiverged& e) {
            CHECK(e.epoch() > 0);
            for (const auto& h : e.last_good().history) CHECK(std::isfinite(h.total));
            for (const auto& layer : e.last_good().decoder.layers) CHECK(layer.weight.allFinite());
        }
    }

    TEST_CASE("checkpoint round trip is exact and detects bad headers")
    {
        testing::TempDir dir;
        const TrainResult r = train(toy_dataset(300), toy_config(20), toy_arch());
        const Checkpoint ck{r.decoder, r.latents, toy_config(20), 20, r.history};
        save_checkpoint(ck, dir / "ck.json");
        const Checkpoint back = load_checkpoint(dir / "ck.json");
        CHECK(back.epoch == 20);
        CHECK(back.latents.ids == ck.latents.ids);
        CHECK(back.latents.codes == ck.latents.codes);
        REQUIRE(back.history.size() == ck.history.size());
        for (std::size_t i = 0; i < ck.history.size(); ++i) CHECK(back.history[i].total == ck.history[i].total);
        REQUIRE(back.decoder.layers.size() == ck.decoder.layers.size());
        for (std::size_t l = 0; l < ck.decoder.layers.size(); ++l) {
            CHECK(back.decoder.layers[l].weight == ck.decoder.layers[l].weight);
            CHECK(back.decoder.layers[l].bias == ck.decoder.layers[l].bias);
            CHECK(back.decoder.layers[l].k == ck.decoder.layers[l].k);
        }
        Rng rng(4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const Vec3 x(u(rng), u(rng), u(rng));
            const Eigen::VectorXd z = Eigen::VectorXd::Constant(1, u(rng));
            CHECK(neural::decoder_forward(back.decoder, x, z) == neural::decoder_forward(ck.decoder, x, z));
        }

        std::string text = testing::read_text(dir / "ck.json");
        testing::write_text(dir / "corrupt.json", "garbage" + text);
        CHECK_THROWS_AS((void)load_checkpoint(dir / "corrupt.json"), FormatError);
        std::string renamed = text;
        renamed.replace(renamed.find("shapeopt-checkpoint"), 19, "something-different");
        testing::write_text(dir / "renamed.json", renamed);
        CHECK_THROWS_AS((void)load_checkpoint(dir / "renamed.json"), FormatError);
        std::string bumped = text;
        const auto at = bumped.find("\"version\": \"1\"");
        REQUIRE(at != std::string::npos);
        bumped.replace(at, 14, "\"version\": \"2\"");
        testing::write_text(dir / "bumped.json", bumped);
        CHECK_THROWS_AS((void)load_checkpoint(dir / "bumped.json"), VersionError);
        CHECK_THROWS_AS((void)load_checkpoint(dir / "missing.json"), IoError);
    }

    TEST_CASE("reconstruction is watertight at coarse and fine resolution; far latents may be empty")
    {
        const TrainResult r = train(toy_dataset(), toy_config(300), toy_arch());
        for (int res : {8, 64}) {
            const auto m = reconstruct(r.decoder, r.latents.codes[0], res);
            CHECK(geometry::validate_watertight(m).is_watertight);
        }
        const double zmax = std::max(std::abs(r.latents.codes[0](0)), std::abs(r.latents.codes[1](0)));
        try {
            const auto far = reconstruct(r.decoder, Eigen::VectorXd::Constant(1, 100.0 * zmax), 32);
            CHECK(far.faces.size() > 0);
        } catch (const EmptySurfaceError&) {
            CHECK(true);
        }
        const auto grid = decoder_grid(r.decoder, r.latents.codes[1], 9);
        CHECK(grid.values.size() == 729);
        CHECK(grid.at(4, 4, 4) == doctest::Approx(neural::decoder_forward(r.decoder, Vec3::Zero(), r.latents.codes[1])).epsilon(1e-12));
    }
}
