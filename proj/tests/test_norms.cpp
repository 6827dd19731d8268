#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mlsw/layer_ops.hpp"
#include "mlsw/norms.hpp"
#include "mlsw/spectral_grid.hpp"

using namespace mlsw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LayerField random_smooth_field(std::size_t n, const SpatialGrid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    LayerField f(n, g.size());
    for (std::size_t i = 0; i < n; ++i) {
        const double a = d(rng), b = d(rng), c = d(rng);
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double x = g.node(j);
            f(i, j) = a * std::cos(g.wavenumber(1) * x) + b * std::sin(g.wavenumber(2) * x) + c;
        }
    }
    return f;
}

} // namespace

TEST_CASE("normalized lq norms", "[norms]") {
    CHECK_THAT(lq_norm(LayerVector(17, 1.0), 2.0), WithinRel(1.0, 1e-15));
    CHECK_THAT(lq_norm(LayerVector{1, -1, 1, -1}, 1.0), WithinRel(1.0, 1e-15));
    CHECK(lq_norm(LayerVector{1, -3, 2}, infinity_exponent) == 3.0);
    CHECK_THAT(lq_norm(LayerVector{3, 4}, 2.0), WithinRel(std::sqrt(12.5), 1e-15));
    CHECK_THAT(lq_norm(LayerVector{3, 4}, 2.0, 5), WithinRel(std::sqrt(5.0), 1e-15));
    CHECK_THROWS_AS(lq_norm(LayerVector{1}, 0.5), std::invalid_argument);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 100; ++trial) {
        LayerVector f(1 + trial % 40);
        for (auto& v : f) v = d(rng);
        const double n1 = lq_norm(f, 1.0), n2 = lq_norm(f, 2.0), n3 = lq_norm(f, 3.0);
        const double ninf = lq_norm(f, infinity_exponent);
        CHECK(n1 <= n2 * (1 + 1e-14));
        CHECK(n2 <= n3 * (1 + 1e-14));
        CHECK(n3 <= ninf * (1 + 1e-14));
    }
}

TEST_CASE("mixed norms", "[norms]") {
    const SpatialGrid g(3.0, 32);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    LayerField f(5, 32);
    for (double& v : f.values()) v = d(rng);
    CHECK_THAT(mixed_norm(g, f, OuterNorm::x, 2, 2), WithinRel(mixed_norm(g, f, OuterNorm::layer, 2, 2), 1e-12));
    CHECK(mixed_norm(g, LayerField(5, 32), OuterNorm::x, 1, infinity_exponent) == 0.0);

    LayerField one(1, 32);
    for (double& v : one.values()) v = d(rng);
    for (double p : {1.0, 2.0, infinity_exponent}) {
        const double plain = lp_x_norm(g, one.row(0), p);
        CHECK_THAT(mixed_norm(g, one, OuterNorm::x, p, 2), WithinRel(plain, 1e-14));
        CHECK_THAT(mixed_norm(g, one, OuterNorm::layer, p, 1), WithinRel(plain, 1e-14));
    }
    // dx * sum |f| for a constant
    CHECK_THAT(lp_x_norm(g, std::vector<double>(32, 2.0), 1.0), WithinRel(6.0, 1e-14));
}

TEST_CASE("H^{s,k} norms", "[norms]") {
    const SpatialGrid g(4.0 * std::numbers::pi, 64);
    CHECK(hsk_norm(g, LayerField(4, 64), 3, 2) == 0.0);
    // Constant c everywhere, s = k = 0: c * sqrt(L).
    CHECK_THAT(hsk_norm(g, LayerField(4, 64, 1.5), 0, 0), WithinRel(1.5 * std::sqrt(g.length()), 1e-14));

    std::mt19937_64 rng(12);
    LayerField rows(1, 64);
    const auto base = random_smooth_field(1, g, rng);
    LayerField layered(6, 64);
    for (std::size_t i = 0; i < 6; ++i) std::copy(base.row(0).begin(), base.row(0).end(), layered.row(i).begin());
    CHECK_THAT(hsk_norm(g, layered, 2, 1), WithinRel(hsk_norm(g, layered, 2, 0), 1e-12));

    // k = 0 is ||Lambda^s F||_{l^2(L^2)} unrolled.
    const auto f = random_smooth_field(5, g, rng);
    double direct = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
        for (double v : g.lambda_s(f.row(i), 3.0)) direct += v * v;
    }
    direct = std::sqrt(g.dx() * direct / 5.0);
    CHECK_THAT(hsk_norm(g, f, 3, 0), WithinRel(direct, 1e-12));

    CHECK_THROWS_AS(hsk_norm(g, f, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(hsk_norm(g, f, 1, 2), std::invalid_argument);
}

TEST_CASE("w^{k,inf} norms", "[norms]") {
    CHECK(wk_inf_norm(LayerVector(5, -2.0), 0) == 2.0);
    CHECK_THAT(wk_inf_norm(LayerVector(5, -2.0), 2), WithinAbs(2.0, 1e-15));
    const DensityGrid dg(10, 1.0, 2.0);
    CHECK_THAT(wk_inf_norm(dg.rho(), 1), WithinRel(dg.rho(9) + 1.0, 1e-13));

    // rho^2 on N = 8: D^2 rho^2 = 2 exactly, D rho^2 = -(rho_i + rho_{i+1}).
    const DensityGrid g8(8, 1.0, 2.0);
    LayerVector sq(8);
    for (std::size_t i = 0; i < 8; ++i) sq[i] = g8.rho(i) * g8.rho(i);
    double want = sq[7];
    double dmax = 0.0;
    for (std::size_t i = 0; i < 7; ++i) dmax = std::max(dmax, 8.0 * std::abs(sq[i] - sq[i + 1]));
    want += dmax + 2.0;
    CHECK_THAT(wk_inf_norm(sq, 2), WithinRel(want, 1e-12));
    CHECK_THROWS_AS(wk_inf_norm(LayerVector{1.0, 2.0}, 2), DimensionError);
}

TEST_CASE("norm inequalities on random inputs", "[norms]") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial) % 60;
        LayerVector f(n);
        for (auto& v : f) v = d(rng);
        for (double q : {1.0, 2.0, infinity_exponent}) CHECK(lq_norm(apply_S(f), q) <= lq_norm(f, q) * (1 + 1e-14));
        LayerVector g(f.begin(), f.end() - 1);
        CHECK(lq_norm(apply_S0(g), 2.0) <= lq_norm(g, 2.0, n) * (1 + 1e-14));
        CHECK(lq_norm(apply_T(f), 2.0) <= lq_norm(f, infinity_exponent) * (1 + 1e-14));
        LayerVector df = apply_Drho(f);
        for (auto& v : df) v /= static_cast<double>(n);
        CHECK(lq_norm(df, 2.0, n) <= 2.0 * lq_norm(f, 2.0) * (1 + 1e-14));
    }
}

TEST_CASE("homogeneity and triangle inequality", "[norms]") {
    const SpatialGrid g(4.0, 32);
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_smooth_field(4, g, rng);
        const auto b = random_smooth_field(4, g, rng);
        const double na = hsk_norm(g, a, 3, 2), nb = hsk_norm(g, b, 3, 2);
        CHECK(hsk_norm(g, a + b, 3, 2) <= na + nb + 1e-12);
        CHECK_THAT(hsk_norm(g, -2.5 * a, 3, 2), WithinRel(2.5 * na, 1e-12));
        CHECK(mixed_norm(g, a + b, OuterNorm::x, 1, 2) <=
              mixed_norm(g, a, OuterNorm::x, 1, 2) + mixed_norm(g, b, OuterNorm::x, 1, 2) + 1e-12);
    }
}

TEST_CASE("discrete trace embedding ratio stays bounded", "[norms]") {
    const SpatialGrid g(4.0 * std::numbers::pi, 64);
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (std::size_t n : {8u, 16u, 32u, 64u, 128u}) {
        for (int trial = 0; trial < 5; ++trial) {
            const auto f = random_smooth_field(n, g, rng);
            double sup = 0.0;
            for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, g.sobolev_norm_squared(f.row(i), 2.0));
            worst = std::max(worst, std::sqrt(sup) / hsk_norm(g, f, 2.5, 1));
        }
    }
    CHECK(worst <= 4.0);
}

TEST_CASE("solution norm terms", "[norms]") {
    const SpatialGrid g(4.0, 32);
    const auto t = solution_norm_terms(g, LayerField(3, 32), LayerField(3, 32), 3.0);
    CHECK(t.total(0.05) == 0.0);
    std::mt19937_64 rng(1);
    const auto h = random_smooth_field(3, g, rng);
    const auto u = random_smooth_field(3, g, rng);
    const auto terms = solution_norm_terms(g, h, u, 3.0);
    CHECK_THAT(terms.u_s_2, WithinRel(hsk_norm(g, u, 3, 2), 1e-14));
    CHECK_THAT(terms.h_sm1_1, WithinRel(hsk_norm(g, h, 2, 1), 1e-14));
    CHECK_THAT(terms.total(0.04), WithinRel(terms.h_sm1_1 + terms.sh_s_2 + terms.tsh_s_0 + terms.u_s_2 +
                                                0.2 * terms.h_s_2,
                                            1e-14));
    const auto d = dissipation_integrands(g, h, 3.0);
    CHECK(d.dh_sm1_1 >= 0.0);
    CHECK(d.dsh_s_2 >= 0.0);
    CHECK(d.dtsh_s_0 >= 0.0);
    CHECK(d.dh_s_2 >= d.dh_sm1_1 * 0.0);
}
