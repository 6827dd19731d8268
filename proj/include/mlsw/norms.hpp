#pragma once

// Normalized layer norms and their mixed/Sobolev combinations.
//
// Conventions:
//  * |F|_{l^q} = (sum_i |F_i|^q / N)^{1/q}. N is the layer count of the density
//    grid; vectors shortened by D_rho or M keep that normalization, which makes
//    (1/N) sum a Riemann sum in rho.
//  * x-integrals are dx * sum_j (trapezoid == Riemann on a periodic grid).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsw/layer_field.hpp"
#include "mlsw/layer_ops.hpp"
#include "mlsw/spectral_grid.hpp"

namespace mlsw {

inline constexpr double infinity_exponent = std::numeric_limits<double>::infinity();

namespace detail {

inline void check_exponent(double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("norm exponent must be >= 1");
}

// (sum |v|^q / count)^{1/q}, or max |v| for q = inf.
inline double power_mean(std::span<const double> v, double q, double count) {
    check_exponent(q);
    if (std::isinf(q)) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    double acc = 0.0;
    if (q == 1.0) {
        for (double x : v) acc += std::abs(x);
        return acc / count;
    }
    if (q == 2.0) {
        for (double x : v) acc += x * x;
        return std::sqrt(acc / count);
    }
    for (double x : v) acc += std::pow(std::abs(x), q);
    return std::pow(acc / count, 1.0 / q);
}

} // namespace detail

/// Normalized l^q norm; `normalizer` defaults to the vector length.
inline double lq_norm(std::span<const double> f, double q, std::size_t normalizer = 0) {
    const double n = static_cast<double>(normalizer == 0 ? f.size() : normalizer);
    if (f.empty()) return 0.0;
    return detail::power_mean(f, q, n);
}

/// Plain L^p_x norm of one row with the dx * sum convention.
inline double lp_x_norm(const SpatialGrid& grid, std::span<const double> f, double p) {
    if (std::isinf(p)) return detail::power_mean(f, p, 1.0);
    return detail::power_mean(f, p, 1.0 / grid.dx());
}

enum class OuterNorm {
    x,     ///< L^p_x(l^q): layer norm at each node, then x norm
    layer  ///< l^q(L^p_x): x norm of each layer, then layer norm
};

/// L^p_x(l^q) or l^q(L^p_x) norm of a layer field.
inline double mixed_norm(const SpatialGrid& grid, const LayerField& f, OuterNorm outer, double p,
                         double q, std::size_t normalizer = 0) {
    const std::size_t n = normalizer == 0 ? f.rows() : normalizer;
    if (outer == OuterNorm::x) {
        std::vector<double> per_node(f.cols());
        for (std::size_t j = 0; j < f.cols(); ++j) {
            const auto col = f.column_values(j);
            per_node[j] = lq_norm(col, q, n);
        }
        return lp_x_norm(grid, per_node, p);
    }
    std::vector<double> per_layer(f.rows());
    for (std::size_t i = 0; i < f.rows(); ++i) per_layer[i] = lp_x_norm(grid, f.row(i), p);
    return lq_norm(per_layer, q, n);
}

/// ||d^d/dx^d F||^2_{l^2(H^sigma_x)} with layer normalizer n.
inline double layer_sobolev_squared(const SpatialGrid& grid, const LayerField& f, double sigma,
                                    std::size_t normalizer, int x_derivative = 0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.rows(); ++i) {
        acc += grid.sobolev_norm_squared(f.row(i), sigma, x_derivative);
    }
    return acc / static_cast<double>(normalizer);
}

/// ||F||^2_{H^{s,k}} = sum_{j<=k} ||D_rho^j F||^2_{l^2(H^{s-j}_x)}, optionally of d^d/dx^d F.
///
/// k is limited to {0, 1, 2}. Terms with D_rho^j undefined (N <= j) contribute
/// nothing, so one- and two-layer fields have well-defined norms.
inline double hsk_norm_squared(const SpatialGrid& grid, const LayerField& f, double s, int k,
                               std::size_t normalizer = 0, int x_derivative = 0) {
    if (k < 0 || k > 2) {
        throw std::invalid_argument("hsk_norm: vertical order " + std::to_string(k) + " unsupported");
    }
    if (static_cast<double>(k) > s) throw std::invalid_argument("hsk_norm: requires k <= s");
    const std::size_t n = normalizer == 0 ? f.rows() : normalizer;
    double acc = layer_sobolev_squared(grid, f, s, n, x_derivative);
    if (k >= 1 && f.rows() >= 2) {
        acc += layer_sobolev_squared(grid, apply_Drho(f), s - 1.0, n, x_derivative);
    }
    if (k >= 2 && f.rows() >= 3) {
        acc += layer_sobolev_squared(grid, apply_Drho2(f), s - 2.0, n, x_derivative);
    }
    return acc;
}

inline double hsk_norm(const SpatialGrid& grid, const LayerField& f, double s, int k,
                       std::size_t normalizer = 0) {
    return std::sqrt(hsk_norm_squared(grid, f, s, k, normalizer));
}

/// |F|_{w^{k,inf}} = sum_{l<=k} |D_rho^l F|_{l^inf}.
inline double wk_inf_norm(std::span<const double> f, int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("wk_inf_norm: k must be 0, 1 or 2");
    if (f.size() <= static_cast<std::size_t>(k)) {
        throw DimensionError("wk_inf_norm: need more than k layers");
    }
    double total = lq_norm(f, infinity_exponent);
    if (k >= 1) total += lq_norm(apply_Drho(f), infinity_exponent);
    if (k >= 2) total += lq_norm(apply_Drho2(f), infinity_exponent);
    return total;
}

/// Instantaneous terms of the composite solution norm.
struct SolutionNormTerms {
    double h_sm1_1 = 0.0;  ///< ||H||_{H^{s-1,1}}
    double sh_s_2 = 0.0;   ///< ||SH||_{H^{s,2}}
    double tsh_s_0 = 0.0;  ///< ||TSH||_{H^{s,0}}
    double u_s_2 = 0.0;    ///< ||U||_{H^{s,2}}
    double h_s_2 = 0.0;    ///< ||H||_{H^{s,2}} (weighted by sqrt(kappa) in the total)

    [[nodiscard]] double total(double kappa) const {
        return h_sm1_1 + sh_s_2 + tsh_s_0 + u_s_2 + std::sqrt(kappa) * h_s_2;
    }
};

/// Squared integrands of the time-integrated (dissipation) terms.
struct DissipationIntegrands {
    double dh_sm1_1 = 0.0;  ///< ||d_x H||^2_{H^{s-1,1}}
    double dsh_s_2 = 0.0;   ///< ||d_x SH||^2_{H^{s,2}}
    double dtsh_s_0 = 0.0;  ///< ||d_x TSH||^2_{H^{s,0}}
    double dh_s_2 = 0.0;    ///< ||d_x H||^2_{H^{s,2}}
};

inline SolutionNormTerms solution_norm_terms(const SpatialGrid& grid, const LayerField& h,
                                             const LayerField& u, double s) {
    const LayerField sh = apply_S(h);
    SolutionNormTerms t;
    t.h_sm1_1 = std::sqrt(hsk_norm_squared(grid, h, s - 1.0, 1));
    t.sh_s_2 = std::sqrt(hsk_norm_squared(grid, sh, s, 2));
    t.tsh_s_0 = std::sqrt(hsk_norm_squared(grid, apply_T(sh), s, 0));
    t.u_s_2 = std::sqrt(hsk_norm_squared(grid, u, s, 2));
    t.h_s_2 = std::sqrt(hsk_norm_squared(grid, h, s, 2));
    return t;
}

inline DissipationIntegrands dissipation_integrands(const SpatialGrid& grid, const LayerField& h,
                                                    double s) {
    const LayerField sh = apply_S(h);
    DissipationIntegrands d;
    d.dh_sm1_1 = hsk_norm_squared(grid, h, s - 1.0, 1, 0, 1);
    d.dsh_s_2 = hsk_norm_squared(grid, sh, s, 2, 0, 1);
    d.dtsh_s_0 = hsk_norm_squared(grid, apply_T(sh), s, 0, 0, 1);
    d.dh_s_2 = hsk_norm_squared(grid, h, s, 2, 0, 1);
    return d;
}

} // namespace mlsw
