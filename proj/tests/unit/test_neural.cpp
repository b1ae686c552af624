#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "shapeopt/error.hpp"
#include "shapeopt/neural/decoder.hpp"
#include "shapeopt/neural/encoding.hpp"

using namespace shapeopt;
using namespace shapeopt::neural;

namespace {

ArchitectureConfig small_arch(int latent_dim = 2, int layers = 2, int width = 8, int levels = 2)
{
    ArchitectureConfig a;
    a.latent_dim = latent_dim;
    a.hidden_layers = layers;
    a.hidden_width = width;
    a.encoding.levels = levels;
    a.output_scale = 0.1;
    return a;
}

} // namespace

TEST_SUITE("neural")
{
    TEST_CASE("encoding of the origin alternates sin 0 and cos 1")
    {
        const Eigen::VectorXd e = positional_encoding(Vec3(Vec3::Zero()), {2, false});
        REQUIRE(e.size() == 12);
        for (int i = 0; i < 12; ++i) CHECK(e(i) == (i % 2 == 0 ? 0.0 : 1.0));
    }

    TEST_CASE("encoding at a quarter period")
    {
        const Eigen::VectorXd e = positional_encoding(Vec3(0.5, 0, 0), {1, false});
        REQUIRE(e.size() == 6);
        CHECK(e(0) == doctest::Approx(1.0));
        CHECK(std::abs(e(1)) < 1e-15);
    }

    TEST_CASE("zero levels with raw input returns the point")
    {
        const Vec3 p(0.3, -0.2, 0.7);
        const Eigen::VectorXd e = positional_encoding(p, {0, true});
        REQUIRE(e.size() == 3);
        CHECK(e == Eigen::VectorXd(p));
    }

    TEST_CASE("encoded dimension formula and batch form agree with the single-point form")
    {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int levels = 0; levels <= 7; ++levels) {
            for (bool inc : {false, true}) {
                const EncodingConfig cfg{levels, inc};
                if (cfg.dim() == 0) continue;
                CHECK(cfg.dim() == 3 * (2 * levels + (inc ? 1 : 0)));
                Eigen::Matrix3Xd pts(3, 4);
                for (int c = 0; c < 4; ++c) pts.col(c) = Vec3(u(rng), u(rng), u(rng));
                const Eigen::MatrixXd batch = positional_encoding(pts, cfg);
                REQUIRE(batch.rows() == cfg.dim());
                for (int c = 0; c < 4; ++c) CHECK(batch.col(c) == positional_encoding(Vec3(pts.col(c)), cfg));
            }
        }
    }

    TEST_CASE("lipschitz normalization examples")
    {
        LipschitzLayer layer;
        layer.weight = Eigen::MatrixXd(2, 2);
        layer.weight << 3, 4, 0, 0;
        layer.bias = Eigen::VectorXd::Zero(2);
        layer.k = inverse_softplus(14.0);
        CHECK(lipschitz_normalize(layer) == layer.weight);
        layer.k = inverse_softplus(3.5);
        const Eigen::MatrixXd w = lipschitz_normalize(layer);
        CHECK(w(0, 0) == doctest::Approx(1.5));
        CHECK(w(0, 1) == doctest::Approx(2.0));
        CHECK(w(1, 0) == 0.0);
        CHECK(w(1, 1) == 0.0);
    }

    TEST_CASE("normalized rows never exceed the bound")
    {
        Rng rng(4);
        std::normal_distribution<double> g(0.0, 3.0);
        for (int trial = 0; trial < 200; ++trial) {
            LipschitzLayer layer;
            layer.weight = Eigen::MatrixXd::NullaryExpr(5, 7, [&] { return g(rng); });
            layer.bias = Eigen::VectorXd::Zero(5);
            layer.k = g(rng);
            const Eigen::VectorXd rows = lipschitz_normalize(layer).cwiseAbs().rowwise().sum();
            CHECK(rows.maxCoeff() <= softplus(layer.k) + 1e-9);
        }
    }

    TEST_CASE("lipschitz loss is the product of softplus bounds")
    {
        Rng rng(1);
        DecoderParams p = init_decoder(small_arch(1, 1, 4, 0), rng);
        REQUIRE(p.layers.size() == 2);
        p.layers[0].k = 0.0;
        p.layers[1].k = 0.0;
        CHECK(lipschitz_loss(p) == doctest::Approx(std::log(2.0) * std::log(2.0)).epsilon(1e-12));
        p.layers.pop_back();
        p.layers[0].k = 0.0;
        CHECK(lipschitz_loss(p) == doctest::Approx(0.693147).epsilon(1e-6));
        for (double k : {-40.0, -3.0, 0.5, 30.0, 700.0}) {
            p.layers[0].k = k;
            CHECK(lipschitz_loss(p) > 0.0);
        }
    }

    TEST_CASE("softplus helpers are stable and inverse")
    {
        for (double y : {1e-6, 0.1, 1.0, 5.0, 50.0, 800.0}) CHECK(softplus(inverse_softplus(y)) == doctest::Approx(y).epsilon(1e-12));
        CHECK(std::isfinite(softplus(1000.0)));
        CHECK(softplus(-1000.0) >= 0.0);
    }

    TEST_CASE("initial layout and dimension checks")
    {
        Rng rng(2);
        const DecoderParams p = init_decoder(small_arch(3, 2, 8, 2), rng);
        CHECK(p.input_dim() == 15 + 3);
        CHECK(p.layers.front().inputs() == p.input_dim());
        CHECK(p.layers.back().outputs() == 1);
        for (const auto& layer : p.layers) {
            CHECK(layer.bound() == doctest::Approx(2.0 * layer.weight.cwiseAbs().rowwise().sum().maxCoeff()));
        }
        CHECK_THROWS((void)decoder_forward(p, Vec3(Vec3::Zero()), Eigen::VectorXd(Eigen::VectorXd::Zero(2))));
    }

    TEST_CASE("zero network predicts zero; outputs are deterministic and inside the band")
    {
        Rng rng(3);
        DecoderParams p = init_decoder(small_arch(), rng);
        const Eigen::VectorXd z = Eigen::VectorXd::Constant(2, 0.3);
        const double once = decoder_forward(p, Vec3(0.1, 0.2, 0.3), z);
        CHECK(once == decoder_forward(p, Vec3(0.1, 0.2, 0.3), z));
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            const double d = decoder_forward(p, Vec3(u(rng), u(rng), u(rng)), Eigen::VectorXd::Random(2) * 10.0);
            CHECK(std::abs(d) <= p.output_scale);
        }
        for (auto& layer : p.layers) {
            layer.weight.setZero();
            layer.bias.setZero();
        }
        CHECK(decoder_forward(p, Vec3(0.4, -0.2, 0.9), z) == 0.0);
    }

    TEST_CASE("batched forward equals the single-point forward")
    {
        Rng rng(8);
        const DecoderParams p = init_decoder(small_arch(2, 3, 16, 3), rng);
        const Eigen::Matrix3Xd pts = Eigen::Matrix3Xd::Random(3, 9);
        const Eigen::MatrixXd z = Eigen::MatrixXd::Random(2, 9);
        const Eigen::VectorXd batch = decoder_forward(p, pts, z);
        for (int i = 0; i < 9; ++i) CHECK(batch(i) == doctest::Approx(decoder_forward(p, Vec3(pts.col(i)), z.col(i))).epsilon(1e-14));
        const Eigen::VectorXd shared = decoder_forward_shared(p, pts, z.col(0));
        for (int i = 0; i < 9; ++i) CHECK(shared(i) == doctest::Approx(decoder_forward(p, Vec3(pts.col(i)), z.col(0))).epsilon(1e-14));
    }

    TEST_CASE("zero network with zero targets: only the latent regularizer has a gradient")
    {
        Rng rng(5);
        DecoderParams p = init_decoder(small_arch(2, 2, 6, 1), rng);
        for (auto& layer : p.layers) {
            layer.weight.setZero();
            layer.bias.setZero();
        }
        SampleBatch b = testing::random_batch(6, 2, rng);
        b.distances.setZero();
        b.shape_index = {0, 0, 0, 0, 1, 1};
        Eigen::MatrixXd z(2, 2);
        z << 0.5, -0.25, 1.0, 2.0;
        const BackwardResult r = decoder_backward(p, b, z, {0.1, 0.0});
        for (const auto& g : r.grad.weights) CHECK(g.cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.grad.latents.col(0).isApprox(2.0 * z.col(0) * 4.0 / 6.0));
        CHECK(r.grad.latents.col(1).isApprox(2.0 * z.col(1) * 2.0 / 6.0));
        CHECK(r.loss.clip == 0.0);
    }

    TEST_CASE("single-layer probe matches the hand derivative")
    {
        DecoderParams p;
        p.encoding = {0, true};
        p.latent_dim = 1;
        p.output_scale = 0.1;
        LipschitzLayer layer;
        layer.weight = Eigen::MatrixXd(1, 4);
        layer.weight << 0.3, -0.2, 0.5, 0.7;
        layer.bias = Eigen::VectorXd::Constant(1, 0.05);
        layer.k = inverse_softplus(10.0);
        p.layers.push_back(layer);

        SampleBatch b;
        b.points = Eigen::Matrix3Xd(3, 1);
        b.points.col(0) = Vec3(0.2, 0.4, -0.1);
        b.distances = Eigen::VectorXd::Constant(1, -0.05);
        b.shape_index = {0};
        Eigen::MatrixXd z = Eigen::MatrixXd::Constant(1, 1, 0.3);
        const BackwardResult r = decoder_backward(p, b, z, {0.1, 0.0});

        Eigen::Vector4d u(0.2, 0.4, -0.1, 0.3);
        const double a = layer.weight.row(0).dot(u) + 0.05;
        const double pred = 0.1 * std::tanh(a);
        const double s = pred > -0.05 ? 1.0 : -1.0;
        const double dpred_da = 0.1 * (1.0 - std::tanh(a) * std::tanh(a));
        for (int i = 0; i < 4; ++i) CHECK(r.grad.weights[0](0, i) == doctest::Approx(s * dpred_da * u(i)).epsilon(1e-12));
        CHECK(r.grad.biases[0](0) == doctest::Approx(s * dpred_da).epsilon(1e-12));
        CHECK(r.grad.latents(0, 0) == doctest::Approx(s * dpred_da * 0.7 + 2.0 * 0.3).epsilon(1e-12));
        CHECK(r.grad.k(0) == 0.0);
    }

    TEST_CASE("analytic gradients match central differences")
    {
        Rng rng(12);
        for (int trial = 0; trial < 5; ++trial) {
            DecoderParams p = init_decoder(small_arch(2, 2, 6, 1), rng);
            testing::activate_normalization(p);
            const SampleBatch b = testing::random_batch(8, 2, rng);
            const Eigen::MatrixXd z = Eigen::MatrixXd::Random(2, 2) * 0.5;
            const auto res = testing::check_gradients(p, b, z, {0.1, 1e-3});
            INFO("worst entry " << res.worst_entry);
            CHECK(res.worst_relative < 1e-4);
        }
    }

    TEST_CASE("latent Lipschitz bound holds for random decoders")
    {
        Rng rng(21);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            DecoderParams p = init_decoder(small_arch(3, 3, 16, 2), rng);
            testing::activate_normalization(p);
            const double bound = lipschitz_loss(p) * p.output_scale;
            for (int i = 0; i < 50; ++i) {
                const Vec3 x(u(rng), u(rng), u(rng));
                const Eigen::VectorXd z1 = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
                const Eigen::VectorXd z2 = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
                const double diff = std::abs(decoder_forward(p, x, z1) - decoder_forward(p, x, z2));
                CHECK(diff <= bound * (z1 - z2).cwiseAbs().maxCoeff() * (1.0 + 1e-12));
            }
        }
    }

    TEST_CASE("non-finite parameters raise a numeric error")
    {
        Rng rng(6);
        DecoderParams p = init_decoder(small_arch(), rng);
        p.layers[1].bias(0) = std::numeric_limits<double>::quiet_NaN();
        const SampleBatch b = testing::random_batch(4, 1, rng);
        CHECK_THROWS_AS((void)decoder_backward(p, b, Eigen::MatrixXd::Zero(2, 1), {}), NumericError);
    }
}
