#include <doctest.h>

#include <random>

#include "shapeopt/error.hpp"
#include "shapeopt/latent/latent.hpp"

using namespace shapeopt;
using namespace shapeopt::latent;

namespace {

LatentBank bank_of(const std::vector<std::vector<double>>& codes)
{
    LatentBank b;
    b.dim = static_cast<int>(codes.front().size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        b.ids.push_back("s" + std::to_string(i));
        b.codes.push_back(Eigen::Map<const Eigen::VectorXd>(codes[i].data(), static_cast<Eigen::Index>(codes[i].size())));
    }
    return b;
}

} // namespace

TEST_SUITE("latent")
{
    TEST_CASE("interpolation endpoints and midpoint")
    {
        const Eigen::Vector3d a(0.1, -0.7, 0.3333333333333333);
        const Eigen::Vector3d b(-0.4, 0.2, 1e-3);
        CHECK(interpolate(a, b, 0.0) == Eigen::VectorXd(a));
        CHECK(interpolate(a, b, 1.0) == Eigen::VectorXd(b));
        CHECK(interpolate(a, Eigen::VectorXd(-a), 0.5).isZero(0.0));
        CHECK_THROWS_AS((void)interpolate(a, Eigen::VectorXd::Zero(2), 0.5), ConfigError);
    }

    TEST_CASE("interpolation is linear in both orders")
    {
        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < 500; ++i) {
            const Eigen::VectorXd a = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
            const Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
            const double t = 0.5 * (u(rng) + 1.0);
            const Eigen::VectorXd sum = interpolate(a, b, t) + interpolate(b, a, t);
            CHECK((sum - (a + b)).cwiseAbs().maxCoeff() < 1e-15);
        }
    }

    TEST_CASE("bounds from two one-dimensional codes")
    {
        const SearchBounds b = derive_bounds(bank_of({{0.0}, {1.0}}), 0.2);
        CHECK(b.lower(0) == doctest::Approx(-0.2));
        CHECK(b.upper(0) == doctest::Approx(1.2));
        const SearchBounds hull = derive_bounds(bank_of({{0.0, 3.0}, {1.0, -2.0}}), 0.0);
        CHECK(hull.lower == Eigen::Vector2d(0.0, -2.0));
        CHECK(hull.upper == Eigen::Vector2d(1.0, 3.0));
    }

    TEST_CASE("degenerate dimensions are widened by the mean range of the others")
    {
        const SearchBounds b = derive_bounds(bank_of({{0.0, 5.0, 1.0}, {2.0, 5.0, 3.0}}), 0.5);
        CHECK(b.lower(1) == doctest::Approx(5.0 - 0.5 * 2.0));
        CHECK(b.upper(1) == doctest::Approx(5.0 + 0.5 * 2.0));
        const SearchBounds all = derive_bounds(bank_of({{1.0, 1.0}, {1.0, 1.0}}), 0.25);
        CHECK(all.lower(0) == doctest::Approx(0.75));
        CHECK(all.upper(1) == doctest::Approx(1.25));
        const SearchBounds tight = derive_bounds(bank_of({{1.0}, {1.0}}), 0.0);
        CHECK(tight.lower(0) < tight.upper(0));
        tight.validate();
    }

    TEST_CASE("every training code lies inside the derived box")
    {
        std::mt19937_64 rng(8);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::vector<double>> codes(2 + trial % 7, std::vector<double>(3));
            for (auto& c : codes) {
                for (double& v : c) v = g(rng);
            }
            const LatentBank bank = bank_of(codes);
            for (double margin : {0.0, 0.1, 0.2, 1.0}) {
                const SearchBounds b = derive_bounds(bank, margin);
                for (const auto& c : bank.codes) CHECK(b.contains(c));
            }
        }
    }

    TEST_CASE("bound derivation errors")
    {
        LatentBank empty;
        empty.dim = 2;
        CHECK_THROWS_AS((void)derive_bounds(empty, 0.2), DataError);
        CHECK_THROWS_AS((void)derive_bounds(bank_of({{0.0}}), 0.2), DataError);
        CHECK_THROWS_AS((void)derive_bounds(bank_of({{0.0}, {1.0}}), -0.1), ConfigError);
    }

    TEST_CASE("clamp and lookup")
    {
        const SearchBounds b = derive_bounds(bank_of({{0.0, 0.0}, {1.0, 2.0}}), 0.0);
        CHECK(b.clamp(Eigen::Vector2d(-1.0, 5.0)) == Eigen::VectorXd(Eigen::Vector2d(0.0, 2.0)));
        const LatentBank bank = bank_of({{0.5}, {0.7}});
        REQUIRE(bank.find("s1"));
        CHECK((*bank.find("s1"))(0) == 0.7);
        CHECK_FALSE(bank.find("nope"));
    }
}
