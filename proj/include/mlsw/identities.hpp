#pragma once

// Exact algebraic identities of the layer operators, checked on seeded random vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mlsw/layer_field.hpp"
#include "mlsw/layer_ops.hpp"

namespace mlsw {

struct IdentityResult {
    std::string name;
    std::size_t min_layers = 2;
    double max_residual = 0.0;  ///< max over N and samples of the relative residual
    std::size_t worst_layers = 0;
    std::size_t cases = 0;
    std::vector<std::size_t> skipped;  ///< N below min_layers
    bool passed = true;
};

struct IdentityReport {
    std::size_t max_layers = 0;
    std::uint64_t seed = 0;
    double tolerance = 1e-12;
    std::vector<IdentityResult> results;
    bool passed = true;
};

struct IdentityOptions {
    std::size_t max_layers = 257;
    std::uint64_t seed = 1;
    std::size_t samples = 4;
    double tolerance = 1e-12;
    /// Perturbs the reference side of every identity; exercises the failure path.
    bool corrupt_oracle = false;
};

namespace detail {

// |lhs - rhs|_inf / max(|terms|_inf, tiny)
inline double relative_residual(const LayerVector& lhs, const LayerVector& rhs, double scale) {
    double r = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) r = std::max(r, std::abs(lhs[i] - rhs[i]));
    return r / std::max(scale, std::numeric_limits<double>::min());
}

inline double inf_of(std::initializer_list<const LayerVector*> vs) {
    double m = 0.0;
    for (const auto* v : vs)
        for (double x : *v) m = std::max(m, std::abs(x));
    return m;
}

inline LayerVector sum(const LayerVector& a, const LayerVector& b, double sb = 1.0) {
    LayerVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + sb * b[i];
    return out;
}

} // namespace detail

inline IdentityReport run_identities(const IdentityOptions& opt) {
    IdentityReport rep;
    rep.max_layers = opt.max_layers;
    rep.seed = opt.seed;
    rep.tolerance = opt.tolerance;
    for (const auto& [name, min_n] : {std::pair<const char*, std::size_t>{"abel_summation", 2},
                                      {"leibniz_first_order", 2},
                                      {"leibniz_second_order", 3},
                                      {"gamma_decomposition", 1}}) {
        IdentityResult r;
        r.name = name;
        r.min_layers = min_n;
        rep.results.push_back(std::move(r));
    }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double corruption = opt.corrupt_oracle ? 1e-6 : 0.0;

    auto record = [&](IdentityResult& r, std::size_t n, double res) {
        ++r.cases;
        if (r.cases == 1 || res > r.max_residual) {
            r.max_residual = res;
            r.worst_layers = n;
        }
    };

    for (std::size_t n = 2; n <= opt.max_layers; ++n) {
        // Strictly increasing positive densities, as for any admissible grid.
        const DensityGrid grid(n, 1.0 + 0.5 * (dist(rng) + 1.0), 2.5 + 0.5 * (dist(rng) + 1.0));
        for (std::size_t sample = 0; sample < opt.samples; ++sample) {
            LayerVector f(n), g(n);
            for (auto& v : f) v = dist(rng);
            for (auto& v : g) v = dist(rng);
            const LayerVector fg = hadamard(f, g);

            {  // S(FG) = F (SG) - S_0((D_rho F)(R_u S G))
                const LayerVector sg = apply_S(g);
                const LayerVector lhs = apply_S(fg);
                const LayerVector a = hadamard(f, sg);
                const LayerVector b = apply_S0(hadamard(apply_Drho(f), apply_Ru(sg)));
                LayerVector rhs = detail::sum(a, b, -1.0);
                rhs[0] += corruption;
                record(rep.results[0], n, detail::relative_residual(lhs, rhs, detail::inf_of({&lhs, &a, &b})));
            }
            {  // D_rho(FG) = (D_rho F)(M G) + (M F)(D_rho G)
                const LayerVector lhs = apply_Drho(fg);
                const LayerVector a = hadamard(apply_Drho(f), apply_Mavg(g));
                const LayerVector b = hadamard(apply_Mavg(f), apply_Drho(g));
                LayerVector rhs = detail::sum(a, b);
                rhs[0] += corruption * static_cast<double>(n);
                record(rep.results[1], n, detail::relative_residual(lhs, rhs, detail::inf_of({&lhs, &a, &b})));
            }
            if (n >= 3) {  // D^2(FG) = (D^2 F)(M^2 G) + (M^2 F)(D^2 G) + 2 (M D F)(M D G)
                const LayerVector lhs = apply_Drho2(fg);
                const LayerVector a = hadamard(apply_Drho2(f), apply_Mavg2(g));
                const LayerVector b = hadamard(apply_Mavg2(f), apply_Drho2(g));
                LayerVector c = hadamard(apply_Mavg(apply_Drho(f)), apply_Mavg(apply_Drho(g)));
                for (double& v : c) v *= 2.0;
                LayerVector rhs = detail::sum(detail::sum(a, b), c);
                rhs[0] += corruption * static_cast<double>(n * n);
                record(rep.results[2], n, detail::relative_residual(lhs, rhs, detail::inf_of({&lhs, &a, &b, &c})));
            } else if (sample == 0) {
                rep.results[2].skipped.push_back(n);
            }
            {  // diag(rho) Gamma F = rho_1 (TS)^t TS F + S^t C S F, with T symmetric
                const LayerVector gf = apply_gamma_fast(grid, f);
                LayerVector lhs(n);
                for (std::size_t i = 0; i < n; ++i) lhs[i] = grid.rho(i) * gf[i];
                const LayerVector sf = apply_S(f);
                LayerVector a = apply_St(apply_T(apply_T(sf)));
                for (double& v : a) v *= grid.rho(0);
                const LayerVector b = apply_St(apply_C(sf));
                LayerVector rhs = detail::sum(a, b);
                rhs[0] += corruption;
                record(rep.results[3], n, detail::relative_residual(lhs, rhs, detail::inf_of({&lhs, &a, &b})));
            }
        }
    }
    for (auto& r : rep.results) {
        r.passed = r.max_residual <= opt.tolerance;
        rep.passed = rep.passed && r.passed;
    }
    return rep;
}

} // namespace mlsw
