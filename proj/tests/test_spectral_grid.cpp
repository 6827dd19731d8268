#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mlsw/spectral_grid.hpp"

using namespace mlsw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

ScalarField random_field(const SpatialGrid& g, std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    ScalarField f(g.size());
    for (auto& v : f) v = d(rng);
    return f;
}

constexpr double pi = std::numbers::pi;

} // namespace

TEST_CASE("grid geometry", "[spectral_grid]") {
    const SpatialGrid g(2.0 * pi, 16);
    CHECK(g.node(0) == 0.0);
    CHECK_THAT(g.dx(), WithinRel(2.0 * pi / 16, 1e-15));
    CHECK_THAT(g.wavenumber(3), WithinRel(3.0, 1e-15));
    CHECK(g.spectrum_size() == 9);
    CHECK(g.dealias_cutoff() == 5);
    CHECK_THROWS_AS(SpatialGrid(1.0, 12), std::invalid_argument);
    CHECK_THROWS_AS(SpatialGrid(1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(SpatialGrid(-1.0, 16), std::invalid_argument);
}

TEST_CASE("ddx", "[spectral_grid]") {
    SECTION("constant") {
        const SpatialGrid g;
        const auto d = g.ddx(ScalarField(g.size(), 3.5));
        for (double v : d) CHECK_THAT(v, WithinAbs(0.0, 1e-14));
    }
    SECTION("resolved sine") {
        const SpatialGrid g(5.0, 64);
        const double k = 2.0 * pi / 5.0;
        const auto f = g.sample([k](double x) { return std::sin(k * x); });
        const auto d = g.ddx(f);
        const auto want = g.sample([k](double x) { return k * std::cos(k * x); });
        CHECK(max_abs_diff(d, want) <= 1e-12);
    }
    SECTION("exp(sin x) on M=128, L=2pi") {
        const SpatialGrid g(2.0 * pi, 128);
        const auto f = g.sample([](double x) { return std::exp(std::sin(x)); });
        const auto want = g.sample([](double x) { return std::cos(x) * std::exp(std::sin(x)); });
        CHECK(max_abs_diff(g.ddx(f), want) <= 1e-10);
    }
    SECTION("Nyquist mode is removed") {
        const SpatialGrid g(2.0 * pi, 16);
        ScalarField f(16);
        for (std::size_t j = 0; j < 16; ++j) f[j] = (j % 2 == 0) ? 1.0 : -1.0;
        for (double v : g.ddx(f)) CHECK_THAT(v, WithinAbs(0.0, 1e-14));
    }
    SECTION("twice equals the -k^2 multiplier") {
        const SpatialGrid g(4.0 * pi, 64);
        std::mt19937_64 rng(7);
        auto f = g.dealias(random_field(g, rng));
        const auto d2 = g.ddx(g.ddx(f));
        const auto want = g.apply_multiplier(f, [](std::size_t, double k) { return std::complex<double>(-k * k); });
        CHECK(max_abs_diff(d2, want) <= 1e-12);
    }
}

TEST_CASE("lambda_s", "[spectral_grid]") {
    const SpatialGrid g(2.0 * pi, 32);
    const auto s1 = g.sample([](double x) { return std::sin(x); });
    CHECK(max_abs_diff(g.lambda_s(s1, 0.0), s1) == 0.0);
    // (1 + 1^2)^{2/2} = 2
    const auto two = g.lambda_s(s1, 2.0);
    for (std::size_t j = 0; j < two.size(); ++j) CHECK_THAT(two[j], WithinAbs(2.0 * s1[j], 1e-13));
    const ScalarField c(32, -1.25);
    CHECK(max_abs_diff(g.lambda_s(c, 3.7), c) <= 1e-14);
    CHECK(max_abs_diff(g.lambda_s(g.lambda_s(s1, 1.5), -1.5), s1) <= 1e-14);
}

TEST_CASE("heat_step", "[spectral_grid]") {
    const SpatialGrid g(2.0 * pi, 32);
    const auto s1 = g.sample([](double x) { return std::sin(x); });
    CHECK(max_abs_diff(g.heat_step(s1, 0.1, 0.0), s1) == 0.0);
    const auto decayed = g.heat_step(s1, 0.1, 1.0);
    for (std::size_t j = 0; j < s1.size(); ++j) CHECK_THAT(decayed[j], WithinAbs(std::exp(-0.1) * s1[j], 1e-14));
    const ScalarField c(32, 2.0);
    CHECK(max_abs_diff(g.heat_step(c, 5.0, 3.0), c) <= 1e-14);
    CHECK_THROWS_AS(g.heat_step(c, -1.0, 1.0), std::invalid_argument);

    std::mt19937_64 rng(3);
    const auto f = random_field(g, rng);
    const auto once = g.heat_step(f, 0.3, 0.7);
    const auto twice = g.heat_step(g.heat_step(f, 0.3, 0.2), 0.3, 0.5);
    CHECK(max_abs_diff(once, twice) <= 1e-14);
}

TEST_CASE("dealias", "[spectral_grid]") {
    const SpatialGrid g(2.0 * pi, 32);
    const auto low = g.sample([](double x) { return std::cos(3.0 * x) + 0.5 * std::sin(10.0 * x); });
    CHECK(max_abs_diff(g.dealias(low), low) <= 1e-14);
    const auto high = g.sample([](double x) { return std::cos(15.0 * x); });
    for (double v : g.dealias(high)) CHECK_THAT(v, WithinAbs(0.0, 1e-14));

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const auto f = random_field(g, rng);
        const auto d = g.dealias(f);
        double mf = 0.0, md = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            mf += f[j];
            md += d[j];
        }
        CHECK_THAT(md / 32.0, WithinAbs(mf / 32.0, 1e-14));
    }
}

TEST_CASE("linearity and Parseval", "[spectral_grid]") {
    const SpatialGrid g(3.0, 64);
    std::mt19937_64 rng(5);
    const auto f = random_field(g, rng);
    const auto h = random_field(g, rng);
    const double a = 0.7, b = -1.9;
    ScalarField comb(g.size());
    for (std::size_t j = 0; j < comb.size(); ++j) comb[j] = a * f[j] + b * h[j];

    auto check_linear = [&](auto op) {
        const auto lhs = op(comb);
        const auto fa = op(f);
        const auto hb = op(h);
        double scale = 0.0, err = 0.0;
        for (std::size_t j = 0; j < lhs.size(); ++j) {
            const double rhs = a * fa[j] + b * hb[j];
            scale = std::max(scale, std::abs(rhs));
            err = std::max(err, std::abs(lhs[j] - rhs));
        }
        CHECK(err <= 1e-13 * scale);
    };
    check_linear([&](const ScalarField& x) { return g.ddx(x); });
    check_linear([&](const ScalarField& x) { return g.lambda_s(x, 1.5); });
    check_linear([&](const ScalarField& x) { return g.heat_step(x, 0.2, 0.3); });
    check_linear([&](const ScalarField& x) { return g.dealias(x); });

    // (1/M) sum f^2 == (1/M^2) sum over all M modes |f^_m|^2
    const auto spec = g.forward(f);
    double physical = 0.0;
    for (double v : f) physical += v * v;
    physical /= 64.0;
    double spectral = std::norm(spec[0]) + std::norm(spec[32]);
    for (std::size_t m = 1; m < 32; ++m) spectral += 2.0 * std::norm(spec[m]);
    spectral /= 64.0 * 64.0;
    CHECK_THAT(spectral, WithinRel(physical, 1e-13));

    const auto back = g.inverse(spec);
    CHECK(max_abs_diff(back, f) <= 1e-14);
}

TEST_CASE("sobolev_norm_squared agrees with lambda_s and a Riemann sum", "[spectral_grid]") {
    const SpatialGrid g(4.0 * pi, 128);
    const auto f = g.sample([](double x) { return std::exp(std::cos(0.5 * x)); });
    for (double s : {0.0, 1.0, 2.5, 3.0}) {
        const auto ls = g.lambda_s(f, s);
        double direct = 0.0;
        for (double v : ls) direct += v * v;
        direct *= g.dx();
        CHECK_THAT(g.sobolev_norm_squared(f, s), WithinRel(direct, 1e-12));
    }
    const auto df = g.ddx(f);
    const auto ls = g.lambda_s(df, 2.0);
    double direct = 0.0;
    for (double v : ls) direct += v * v;
    direct *= g.dx();
    CHECK_THAT(g.sobolev_norm_squared(f, 2.0, 1), WithinRel(direct, 1e-12));
}
