#pragma once

// Continuous stratified profiles, their layer projections, the Montgomery
// integral, and the consistency remainder of the Gamma coupling.
//
// Profiles are finite sums of separable terms phi(x) * psi(rho) with rho in
// the rescaled (unit-width) density coordinate of a DensityGrid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mlsw/layer_field.hpp"
#include "mlsw/layer_ops.hpp"
#include "mlsw/norms.hpp"
#include "mlsw/quadrature.hpp"
#include "mlsw/spectral_grid.hpp"

namespace mlsw {

// ---------------------------------------------------------------------------
// Density-direction factors
// ---------------------------------------------------------------------------

/// sum_k c_k rho^k
struct Polynomial {
    std::vector<double> coeffs;
};

/// amplitude * cos(omega * rho + phase)
struct RhoCosine {
    double amplitude = 1.0;
    double omega = 1.0;
    double phase = 0.0;
};

class RhoFunction {
public:
    RhoFunction() : f_(Polynomial{{0.0}}) {}
    RhoFunction(Polynomial p) : f_(std::move(p)) {}  // NOLINT(google-explicit-constructor)
    RhoFunction(RhoCosine c) : f_(c) {}               // NOLINT(google-explicit-constructor)

    static RhoFunction constant(double c) { return Polynomial{{c}}; }

    [[nodiscard]] double operator()(double rho) const { return derivative(rho, 0); }

    /// order-th derivative, any order >= 0.
    [[nodiscard]] double derivative(double rho, int order) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Polynomial>) {
                    double acc = 0.0;
                    for (std::size_t k = f.coeffs.size(); k-- > static_cast<std::size_t>(order);) {
                        double falling = 1.0;
                        for (int d = 0; d < order; ++d) falling *= static_cast<double>(k - d);
                        acc = acc * rho + falling * f.coeffs[k];
                    }
                    return acc;
                } else {
                    // d^n/drho^n cos(w rho + p) = w^n cos(w rho + p + n pi/2)
                    const double arg = f.omega * rho + f.phase + order * std::numbers::pi / 2.0;
                    return f.amplitude * std::pow(f.omega, order) * std::cos(arg);
                }
            },
            f_);
    }

    /// An antiderivative (constant of integration unspecified).
    [[nodiscard]] double antiderivative(double rho) const {
        return std::visit(
            [&](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, Polynomial>) {
                    double acc = 0.0;
                    for (std::size_t k = f.coeffs.size(); k-- > 0;) {
                        acc = acc * rho + f.coeffs[k] / static_cast<double>(k + 1);
                    }
                    return acc * rho;
                } else {
                    if (f.omega == 0.0) return f.amplitude * std::cos(f.phase) * rho;
                    return f.amplitude * std::sin(f.omega * rho + f.phase) / f.omega;
                }
            },
            f_);
    }

    [[nodiscard]] bool is_constant() const {
        if (const auto* p = std::get_if<Polynomial>(&f_)) {
            return std::all_of(p->coeffs.begin() + std::min<std::size_t>(1, p->coeffs.size()),
                               p->coeffs.end(), [](double c) { return c == 0.0; });
        }
        const auto& c = std::get<RhoCosine>(f_);
        return c.omega == 0.0 || c.amplitude == 0.0;
    }

    [[nodiscard]] const std::variant<Polynomial, RhoCosine>& form() const noexcept { return f_; }

private:
    std::variant<Polynomial, RhoCosine> f_;
};

// ---------------------------------------------------------------------------
// Horizontal factors
// ---------------------------------------------------------------------------

struct XConstant {
    double value = 1.0;
};

/// amplitude * sech^2((x - center) / width)
struct XSech2 {
    double amplitude = 1.0;
    double center = 0.0;
    double width = 1.0;
};

/// amplitude * cos(k x + phase)
struct XCosine {
    double amplitude = 1.0;
    double k = 1.0;
    double phase = 0.0;
};

class XFunction {
public:
    XFunction() : f_(XConstant{}) {}
    XFunction(XConstant c) : f_(c) {}  // NOLINT(google-explicit-constructor)
    XFunction(XSech2 s) : f_(s) {}     // NOLINT(google-explicit-constructor)
    XFunction(XCosine c) : f_(c) {}    // NOLINT(google-explicit-constructor)

    [[nodiscard]] double operator()(double x) const {
        return std::visit(
            [x](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, XConstant>) {
                    return f.value;
                } else if constexpr (std::is_same_v<T, XSech2>) {
                    const double c = std::cosh((x - f.center) / f.width);
                    return f.amplitude / (c * c);
                } else {
                    return f.amplitude * std::cos(f.k * x + f.phase);
                }
            },
            f_);
    }

    [[nodiscard]] double dx(double x) const {
        return std::visit(
            [x](const auto& f) -> double {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, XConstant>) {
                    return 0.0;
                } else if constexpr (std::is_same_v<T, XSech2>) {
                    const double z = (x - f.center) / f.width;
                    const double c = std::cosh(z);
                    return -2.0 * f.amplitude * std::tanh(z) / (c * c * f.width);
                } else {
                    return -f.amplitude * f.k * std::sin(f.k * x + f.phase);
                }
            },
            f_);
    }

    [[nodiscard]] bool is_constant() const { return std::holds_alternative<XConstant>(f_); }

    [[nodiscard]] const std::variant<XConstant, XSech2, XCosine>& form() const noexcept { return f_; }

private:
    std::variant<XConstant, XSech2, XCosine> f_;
};

// ---------------------------------------------------------------------------
// Separable fields and profiles
// ---------------------------------------------------------------------------

struct SeparableTerm {
    XFunction x;
    RhoFunction rho;
};

/// f(x, rho) = sum_m phi_m(x) psi_m(rho)
struct SeparableField {
    std::vector<SeparableTerm> terms;

    [[nodiscard]] bool empty() const noexcept { return terms.empty(); }

    [[nodiscard]] double operator()(double x, double rho) const {
        double acc = 0.0;
        for (const auto& t : terms) acc += t.x(x) * t.rho(rho);
        return acc;
    }
    [[nodiscard]] double dx(double x, double rho) const {
        double acc = 0.0;
        for (const auto& t : terms) acc += t.x.dx(x) * t.rho(rho);
        return acc;
    }
    [[nodiscard]] double drho(double x, double rho, int order) const {
        double acc = 0.0;
        for (const auto& t : terms) acc += t.x(x) * t.rho.derivative(rho, order);
        return acc;
    }
    /// True when d/dx f vanishes identically.
    [[nodiscard]] bool x_independent() const {
        return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.x.is_constant(); });
    }
    [[nodiscard]] bool rho_independent() const {
        return std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.rho.is_constant(); });
    }
};

/// Background (x-independent) profile: sum of rho functions.
struct Background {
    std::vector<RhoFunction> parts;

    [[nodiscard]] double operator()(double rho) const {
        double acc = 0.0;
        for (const auto& p : parts) acc += p(rho);
        return acc;
    }
    [[nodiscard]] double derivative(double rho, int order) const {
        double acc = 0.0;
        for (const auto& p : parts) acc += p.derivative(rho, order);
        return acc;
    }
};

/// Background state (hbar, ubar) plus deviations (h, u).
struct ContinuousProfile {
    Background hbar{{RhoFunction::constant(1.0)}};
    Background ubar{};
    SeparableField h{};
    SeparableField u{};
};

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// P_N of a background: (f(rho_i))_i.
inline LayerVector project_PN(const Background& f, const DensityGrid& dgrid) {
    LayerVector v(dgrid.layers());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(dgrid.rho(i));
    return v;
}

/// P_N of a separable field sampled at every node: out(i, j) = f(x_j, rho_i).
inline LayerField project_PN(const SeparableField& f, const SpatialGrid& sgrid, const DensityGrid& dgrid) {
    LayerField out(dgrid.layers(), sgrid.size());
    for (std::size_t i = 0; i < dgrid.layers(); ++i) {
        const double rho = dgrid.rho(i);
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = f(sgrid.node(j), rho);
    }
    return out;
}

/// Cell averages over [rho_{i-1/2}, rho_{i+1/2}] from closed-form antiderivatives.
inline LayerVector project_PN_bar(const Background& f, const DensityGrid& dgrid) {
    const double n = static_cast<double>(dgrid.layers());
    LayerVector v(dgrid.layers(), 0.0);
    for (const auto& p : f.parts) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += n * (p.antiderivative(dgrid.edge(i + 1)) - p.antiderivative(dgrid.edge(i)));
        }
    }
    return v;
}

inline LayerField project_PN_bar(const SeparableField& f, const SpatialGrid& sgrid, const DensityGrid& dgrid) {
    const double n = static_cast<double>(dgrid.layers());
    LayerField out(dgrid.layers(), sgrid.size());
    for (const auto& t : f.terms) {
        const auto phi = sgrid.sample([&t](double x) { return t.x(x); });
        for (std::size_t i = 0; i < dgrid.layers(); ++i) {
            const double avg = n * (t.rho.antiderivative(dgrid.edge(i + 1)) - t.rho.antiderivative(dgrid.edge(i)));
            auto row = out.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) row[j] += avg * phi[j];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Montgomery integral
// ---------------------------------------------------------------------------

/// int_{surf}^{bott} min(r, rho) psi(r) dr, split at the kink r = rho.
inline double min_kernel_integral(const RhoFunction& psi, double rho, double surf, double bott,
                                  const AdaptiveOptions& opt = {}) {
    if (rho < surf || rho > bott) {
        throw std::invalid_argument("min_kernel_integral: rho outside [rho_surf, rho_bott]");
    }
    const double lower = integrate_adaptive([&psi](double r) { return r * psi(r); }, surf, rho, opt);
    const double upper = integrate_adaptive([&psi](double r) { return psi(r); }, rho, bott, opt);
    return lower + rho * upper;
}

/// (M d_x h)(x, rho) = int min(r, rho) d_x h(x, r) dr over the density range of dgrid.
inline double montgomery_dx(const SeparableField& h, const DensityGrid& dgrid, double x, double rho,
                            const AdaptiveOptions& opt = {}) {
    double acc = 0.0;
    for (const auto& t : h.terms) {
        const double dphi = t.x.dx(x);
        if (dphi == 0.0) continue;
        acc += dphi * min_kernel_integral(t.rho, rho, dgrid.surface_density(), dgrid.bottom_density(), opt);
    }
    return acc;
}

/// R_N = Gamma d_x P_N h - P_N((1/rho) M d_x h) on (dgrid x sgrid).
struct ConsistencyRemainder {
    LayerField values;
    std::size_t layers = 0;
    std::size_t nodes = 0;
};

inline ConsistencyRemainder consistency_remainder(const SeparableField& h, const SpatialGrid& sgrid,
                                                  const DensityGrid& dgrid, const AdaptiveOptions& opt = {}) {
    const std::size_t n = dgrid.layers();
    const std::size_t m = sgrid.size();
    LayerField dxph(n, m);
    LayerField continuous(n, m);
    for (const auto& t : h.terms) {
        const auto dphi = sgrid.sample([&t](double x) { return t.x.dx(x); });
        for (std::size_t i = 0; i < n; ++i) {
            const double rho = dgrid.rho(i);
            const double psi = t.rho(rho);
            const double weight =
                min_kernel_integral(t.rho, rho, dgrid.surface_density(), dgrid.bottom_density(), opt) / rho;
            auto a = dxph.row(i);
            auto b = continuous.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                a[j] += dphi[j] * psi;
                b[j] += dphi[j] * weight;
            }
        }
    }
    LayerField r = apply_gamma_fast(dgrid, dxph);
    r -= continuous;
    return {std::move(r), n, m};
}

// ---------------------------------------------------------------------------
// Continuous-side norm
// ---------------------------------------------------------------------------

/// ||f||_{inf,s,k}^2 = sum_{j<=k} sup_rho ||d_rho^j f(., rho)||^2_{H^{s-j}_x}.
/// The supremum is taken over `samples` equispaced densities including both ends.
inline double profile_infinity_norm(const SeparableField& f, const SpatialGrid& sgrid, const DensityGrid& dgrid,
                                    double s, int k, std::size_t samples = 257) {
    if (k < 0 || k > 2) throw std::invalid_argument("profile_infinity_norm: k must be 0, 1 or 2");
    if (samples < 2) throw std::invalid_argument("profile_infinity_norm: need at least two samples");
    const double surf = dgrid.surface_density();
    double total = 0.0;
    for (int j = 0; j <= k; ++j) {
        double sup = 0.0;
        for (std::size_t q = 0; q < samples; ++q) {
            const double rho = surf + static_cast<double>(q) / static_cast<double>(samples - 1);
            const auto row = sgrid.sample([&](double x) { return f.drho(x, rho, j); });
            sup = std::max(sup, sgrid.sobolev_norm_squared(row, s - j));
        }
        total += sup;
    }
    return std::sqrt(total);
}

} // namespace mlsw
