#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "mlsw/dense_ops.hpp"
#include "mlsw/presets.hpp"
#include "mlsw/solver.hpp"
#include "mlsw/stratification.hpp"

using namespace mlsw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

SolverParams params(std::size_t layers, std::size_t points, const std::string& preset = "rest") {
    SolverParams p;
    p.dgrid = DensityGrid(layers);
    p.sgrid = SpatialGrid(4.0 * pi, points);
    const auto prof = make_preset(preset, p.sgrid, p.dgrid);
    p.hbar = project_PN(prof.hbar, p.dgrid);
    p.ubar = LayerVector(layers, 0.0);
    return p;
}

std::pair<LayerField, LayerField> initial(const SolverParams& p, const std::string& preset) {
    const auto prof = make_preset(preset, p.sgrid, p.dgrid);
    return {project_PN(prof.h, p.sgrid, p.dgrid), project_PN(prof.u, p.sgrid, p.dgrid)};
}

SolverState run_fixed(const SolverParams& p, SolverState s, double dt, std::size_t steps) {
    for (std::size_t k = 0; k < steps; ++k) s = step(s, p, dt);
    return s;
}

} // namespace

TEST_CASE("parameter validation", "[solver]") {
    auto p = params(3, 32);
    CHECK_NOTHROW(p.validate());
    p.hbar = {1.0, 0.4, 1.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = params(3, 32);
    p.kappa = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = params(3, 32);
    p.ubar = {0.0};
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = params(3, 32);
    p.cfl = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("fixed points", "[solver]") {
    const auto p = params(4, 32);
    SolverState rest{LayerField(4, 32), LayerField(4, 32), 0.0, {}};
    const auto after = run_fixed(p, rest, 0.05, 10);
    CHECK(after.h.max_abs() == 0.0);
    CHECK(after.u.max_abs() == 0.0);

    // x-homogeneous deviations do not move.
    SolverState flat{LayerField(4, 32, 0.1), LayerField(4, 32, 0.0), 0.0, {}};
    for (std::size_t i = 0; i < 4; ++i)
        for (double& v : flat.h.row(i)) v = 0.05 * static_cast<double>(i + 1);
    const auto moved = run_fixed(p, flat, 0.05, 10);
    CHECK((moved.h - flat.h).max_abs() <= 1e-15);
    CHECK(moved.u.max_abs() <= 1e-15);
}

TEST_CASE("CFL step", "[solver]") {
    SolverParams p;
    p.dgrid = DensityGrid(1);
    p.sgrid = SpatialGrid(0.8, 8);
    SolverState s{LayerField(1, 8), LayerField(1, 8), 0.0, {}};
    CHECK_THAT(cfl_dt(s, p), WithinRel(0.04, 1e-14));
    p.sgrid = SpatialGrid(0.8, 16);
    SolverState s2{LayerField(1, 16), LayerField(1, 16), 0.0, {}};
    CHECK_THAT(cfl_dt(s2, p), WithinRel(0.02, 1e-14));
    p.ubar = {1.0};
    CHECK_THAT(cfl_dt(s2, p), WithinRel(0.01, 1e-14));
}

TEST_CASE("energy", "[solver]") {
    auto p = params(5, 32, "study");
    CHECK(energy(LayerField(5, 32), LayerField(5, 32), p) == 0.0);

    // Potential part equals (1/2)(1/N) dx sum <H, diag(rho) Gamma H>.
    const auto [h, u] = initial(p, "study");
    const auto gam = dense::multiply(dense::diag(p.dgrid.rho()), gamma_dense(p.dgrid));
    double pot = 0.0;
    for (std::size_t j = 0; j < 32; ++j) {
        const auto col = h.column_values(j);
        const auto g = gam.apply(col);
        for (std::size_t i = 0; i < 5; ++i) pot += col[i] * g[i];
    }
    pot *= 0.5 * p.sgrid.dx() / 5.0;
    CHECK_THAT(energy(h, LayerField(5, 32), p), WithinRel(pot, 1e-13));

    // Coercivity: E >= rho_1 h_* / 2 ||U||^2.
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
        LayerField hh(5, 32), uu(5, 32);
        for (double& v : hh.values()) v = d(rng);
        for (double& v : uu.values()) v = d(rng);
        double u2 = 0.0;
        for (double v : uu.values()) u2 += v * v;
        u2 *= p.sgrid.dx() / 5.0;
        CHECK(energy(hh, uu, p) >= 0.5 * p.dgrid.rho(0) * p.h_star * u2);
    }
}

TEST_CASE("energy rate derivation checked against a finite difference", "[solver]") {
    // Linear layer-uniform regime: dE/dt = -kappa (|d_x CSH|^2 + rho_1 |d_x TSH|^2).
    auto p = params(6, 64);
    p.dealias = false;
    auto [h, u] = initial(p, "layer_uniform");
    SolverState s{h, u, 0.0, {}};
    s = run_fixed(p, s, 0.05, 5);  // develop a velocity field
    const double tau = 1e-3;
    const auto fwd = step(s, p, tau);
    const auto a = step(s, p, 0.5 * tau);
    // second-order central difference around t + tau/2
    const double dE = (energy(fwd, p) - energy(s, p)) / tau;
    CHECK_THAT(dE, WithinRel(-energy_dissipation_rate(a.h, p), 1e-5));
}

TEST_CASE("energy decay in the layer-uniform regime", "[solver]") {
    auto p = params(6, 64);
    p.t_end = 4.0;
    auto [h, u] = initial(p, "layer_uniform");
    SolverState s{h, u, 0.0, {}};
    const double dt = cfl_dt(s, p);
    double worst = 0.0;
    bool monotone = true;
    for (int k = 0; k < 60; ++k) {
        const auto next = step(s, p, dt);
        const double drop = energy(next, p) - energy(s, p);
        const auto mid = step(s, p, 0.5 * dt);
        // Simpson in time: the rate vanishes twice per oscillation, where the trapezoid rule is not enough.
        const double want = -dt / 6.0 *
                            (energy_dissipation_rate(s.h, p) + 4.0 * energy_dissipation_rate(mid.h, p) +
                             energy_dissipation_rate(next.h, p));
        worst = std::max(worst, std::abs(drop - want) / std::abs(want));
        monotone = monotone && drop <= 0.0;
        s = next;
    }
    CHECK(monotone);
    CHECK(worst <= 0.01);
}

TEST_CASE("mass conservation", "[solver]") {
    auto p = params(6, 128, "study");
    p.t_end = 10.0;
    p.fixed_dt = 0.01;
    p.output_interval = 1.0;
    const auto [h, u] = initial(p, "study");
    const auto res = simulate(p, h, u);
    REQUIRE(res.status == RunStatus::completed);
    CHECK(res.steps >= 1000);
    for (const auto& d : res.series) CHECK(d.max_mass_drift <= 1e-9);
    CHECK(res.series.size() == 11);
}

TEST_CASE("time stepping is at least third order", "[solver]") {
    auto p = params(4, 64, "small_amplitude");
    const auto [h, u] = initial(p, "small_amplitude");
    const double t = 0.4;
    auto solve = [&](std::size_t steps) {
        return run_fixed(p, SolverState{h, u, 0.0, {}}, t / static_cast<double>(steps), steps);
    };
    const auto ref = solve(320);
    double prev = 0.0;
    std::vector<double> orders;
    for (std::size_t steps : {20u, 40u, 80u}) {
        const auto s = solve(steps);
        const double err = std::max((s.h - ref.h).max_abs(), (s.u - ref.u).max_abs());
        if (prev > 0.0) orders.push_back(std::log2(prev / err));
        prev = err;
    }
    for (double o : orders) CHECK(o >= 3.0);
}

TEST_CASE("guard reporting", "[solver]") {
    auto p = params(2, 32);
    LayerField h0(2, 32), u0(2, 32);
    CHECK_THROWS_AS(check_guard(LayerField(2, 32, -0.8), u0, p, 0.0), CavitationError);
    LayerField bad(2, 32);
    bad(1, 3) = std::nan("");
    CHECK_THROWS_AS(check_guard(bad, u0, p, 0.0), BlowUpError);

    // initial depth below h_* is a configuration problem
    CHECK_THROWS_AS(simulate(p, LayerField(2, 32, -0.6), u0), ConfigError);

    // A strong converging flow drives the layer depth to the floor.
    for (std::size_t j = 0; j < 32; ++j) {
        const double x = p.sgrid.node(j);
        for (std::size_t i = 0; i < 2; ++i) u0(i, j) = 2.0 * std::sin(0.5 * x);
    }
    p.t_end = 20.0;
    const auto res = simulate(p, h0, u0);
    CHECK(res.status != RunStatus::completed);
    CHECK(std::isfinite(res.failure_time));
    CHECK_FALSE(res.message.empty());
}

TEST_CASE("small two-layer run stays away from the guard", "[solver]") {
    auto p = params(2, 64);
    p.t_end = 2.0;
    const auto prof = make_preset("study", p.sgrid, p.dgrid, 1e-3);
    const auto res = simulate(p, project_PN(prof.h, p.sgrid, p.dgrid), LayerField(2, 64));
    CHECK(res.status == RunStatus::completed);
    CHECK(res.final_state.t == 2.0);
    CHECK(res.final_state.h.all_finite());
}

TEST_CASE("solution norm bookkeeping", "[solver]") {
    auto p = params(5, 64, "study");
    p.t_end = 1.0;
    p.output_interval = 0.25;
    const auto [h, u] = initial(p, "study");
    const auto res = simulate(p, h, u);
    REQUIRE(res.status == RunStatus::completed);
    REQUIRE(res.series.size() == 5);
    CHECK_THAT(res.series.front().solution_norm,
               WithinRel(solution_norm_terms(p.sgrid, h, u, 3.0).total(p.kappa), 1e-14));
    const auto n = solution_norm(res.final_state, p);
    CHECK(n.integrated > 0.0);
    CHECK_THAT(n.total, WithinRel(n.instantaneous + n.integrated, 1e-15));

    SolverState untracked{h, u, 0.0, {}};
    untracked.diss.tracked = false;
    CHECK_THROWS_AS(solution_norm(untracked, p), std::logic_error);
}
