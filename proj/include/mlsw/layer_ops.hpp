#pragma once

// Vertical (layer-index) operators, applied column-wise to layer fields.
//
// All operators are matrix-free. Densities are rescaled so that
// rho_bott - rho_surf == 1, which makes consecutive midpoints exactly 1/N apart
// and gives D_rho its plain N * (F_i - F_{i+1}) form.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsw/error.hpp"
#include "mlsw/layer_field.hpp"

namespace mlsw {

class DensityGrid {
public:
    explicit DensityGrid(std::size_t layers = 1, double rho_surf = 1.0, double rho_bott = 2.0)
        : layers_(layers), raw_surf_(rho_surf), raw_bott_(rho_bott) {
        if (layers < 1) throw std::invalid_argument("DensityGrid: at least one layer required");
        if (!(rho_surf > 0.0) || !(rho_bott > rho_surf) || !std::isfinite(rho_bott)) {
            throw std::invalid_argument("DensityGrid: need rho_bott > rho_surf > 0");
        }
        scale_ = 1.0 / (rho_bott - rho_surf);
        surf_ = rho_surf * scale_;
        rho_.resize(layers);
        // (2i-1)/(2N) is a correctly rounded quotient of exact integers, so nested
        // grids with odd refinement ratios share bit-identical midpoints.
        for (std::size_t i = 1; i <= layers; ++i) {
            rho_[i - 1] = surf_ + static_cast<double>(2 * i - 1) / static_cast<double>(2 * layers);
        }
    }

    [[nodiscard]] std::size_t layers() const noexcept { return layers_; }
    [[nodiscard]] double raw_surface_density() const noexcept { return raw_surf_; }
    [[nodiscard]] double raw_bottom_density() const noexcept { return raw_bott_; }
    /// Factor mapping physical densities to the unit-width interval.
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] double surface_density() const noexcept { return surf_; }
    [[nodiscard]] double bottom_density() const noexcept { return surf_ + 1.0; }

    /// Rescaled midpoint density of layer i (0-based).
    [[nodiscard]] double rho(std::size_t i) const noexcept { return rho_[i]; }
    [[nodiscard]] const LayerVector& rho() const noexcept { return rho_; }
    /// Unrescaled midpoint density of layer i.
    [[nodiscard]] double raw_rho(std::size_t i) const noexcept { return rho_[i] / scale_; }
    /// Rescaled cell edge rho_{i+1/2} in the 1-based convention, i in [0, N].
    [[nodiscard]] double edge(std::size_t i) const noexcept {
        return surf_ + static_cast<double>(i) / static_cast<double>(layers_);
    }

private:
    std::size_t layers_;
    double raw_surf_;
    double raw_bott_;
    double scale_ = 1.0;
    double surf_ = 0.0;
    LayerVector rho_;
};

namespace detail {

inline void require_rows(const LayerField& f, std::size_t min_rows, const char* op) {
    if (f.rows() < min_rows) {
        throw DimensionError(std::string(op) + ": needs at least " + std::to_string(min_rows) +
                             " layers, got " + std::to_string(f.rows()));
    }
}

template <class Op>
LayerVector on_vector(Op op, std::span<const double> v) {
    const LayerField out = op(LayerField::column(v));
    return out.column_values(0);
}

} // namespace detail

/// (SF)_i = (1/N) sum_{j>=i} F_j.
inline LayerField apply_S(const LayerField& f) {
    detail::require_rows(f, 1, "apply_S");
    const std::size_t n = f.rows();
    const double w = 1.0 / static_cast<double>(n);
    LayerField out(n, f.cols());
    for (std::size_t i = n; i-- > 0;) {
        auto o = out.row(i);
        auto src = f.row(i);
        if (i + 1 < n) {
            auto below = out.row(i + 1);
            for (std::size_t j = 0; j < o.size(); ++j) o[j] = below[j] + w * src[j];
        } else {
            for (std::size_t j = 0; j < o.size(); ++j) o[j] = w * src[j];
        }
    }
    return out;
}

/// S without its last column: N-1 rows in, N rows out, last row zero.
inline LayerField apply_S0(const LayerField& g) {
    detail::require_rows(g, 1, "apply_S0");
    const std::size_t n = g.rows() + 1;
    const double w = 1.0 / static_cast<double>(n);
    LayerField out(n, g.cols());
    for (std::size_t i = n - 1; i-- > 0;) {
        auto o = out.row(i);
        auto below = out.row(i + 1);
        auto src = g.row(i);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = below[j] + w * src[j];
    }
    return out;
}

/// Transpose of S: (S^t F)_j = (1/N) sum_{i<=j} F_i.
inline LayerField apply_St(const LayerField& f) {
    detail::require_rows(f, 1, "apply_St");
    const std::size_t n = f.rows();
    const double w = 1.0 / static_cast<double>(n);
    LayerField out(n, f.cols());
    for (std::size_t i = 0; i < n; ++i) {
        auto o = out.row(i);
        auto src = f.row(i);
        if (i > 0) {
            auto above = out.row(i - 1);
            for (std::size_t j = 0; j < o.size(); ++j) o[j] = above[j] + w * src[j];
        } else {
            for (std::size_t j = 0; j < o.size(); ++j) o[j] = w * src[j];
        }
    }
    return out;
}

/// (D_rho F)_i = N (F_i - F_{i+1}); N-1 rows.
inline LayerField apply_Drho(const LayerField& f) {
    detail::require_rows(f, 2, "apply_Drho");
    const std::size_t n = f.rows();
    const double scale = static_cast<double>(n);
    LayerField out(n - 1, f.cols());
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto o = out.row(i);
        auto a = f.row(i);
        auto b = f.row(i + 1);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = scale * (a[j] - b[j]);
    }
    return out;
}

/// (D_rho^2 F)_i = N^2 (F_i - 2 F_{i+1} + F_{i+2}); N-2 rows.
inline LayerField apply_Drho2(const LayerField& f) {
    detail::require_rows(f, 3, "apply_Drho2");
    const std::size_t n = f.rows();
    const double scale = static_cast<double>(n) * static_cast<double>(n);
    LayerField out(n - 2, f.cols());
    for (std::size_t i = 0; i + 2 < n; ++i) {
        auto o = out.row(i);
        auto a = f.row(i);
        auto b = f.row(i + 1);
        auto c = f.row(i + 2);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = scale * (a[j] - 2.0 * b[j] + c[j]);
    }
    return out;
}

/// Neighbour averages; N-1 rows.
inline LayerField apply_Mavg(const LayerField& f) {
    detail::require_rows(f, 2, "apply_Mavg");
    LayerField out(f.rows() - 1, f.cols());
    for (std::size_t i = 0; i + 1 < f.rows(); ++i) {
        auto o = out.row(i);
        auto a = f.row(i);
        auto b = f.row(i + 1);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = 0.5 * (a[j] + b[j]);
    }
    return out;
}

/// M^2 = M~ M: (F_i + 2F_{i+1} + F_{i+2}) / 4; N-2 rows.
inline LayerField apply_Mavg2(const LayerField& f) {
    detail::require_rows(f, 3, "apply_Mavg2");
    LayerField out(f.rows() - 2, f.cols());
    for (std::size_t i = 0; i + 2 < f.rows(); ++i) {
        auto o = out.row(i);
        auto a = f.row(i);
        auto b = f.row(i + 1);
        auto c = f.row(i + 2);
        for (std::size_t j = 0; j < o.size(); ++j) o[j] = 0.25 * (a[j] + 2.0 * b[j] + c[j]);
    }
    return out;
}

/// Discrete trace T = sqrt(N) P: keeps sqrt(N) F_1, zeros elsewhere.
inline LayerField apply_T(const LayerField& f) {
    detail::require_rows(f, 1, "apply_T");
    LayerField out(f.rows(), f.cols());
    const double s = std::sqrt(static_cast<double>(f.rows()));
    auto o = out.row(0);
    auto a = f.row(0);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = s * a[j];
    return out;
}

/// C = Id - P: zeros the first layer.
inline LayerField apply_C(const LayerField& f) {
    detail::require_rows(f, 1, "apply_C");
    LayerField out = f;
    for (double& v : out.row(0)) v = 0.0;
    return out;
}

/// Drops the first layer.
inline LayerField apply_Ru(const LayerField& f) {
    detail::require_rows(f, 2, "apply_Ru");
    LayerField out(f.rows() - 1, f.cols());
    for (std::size_t i = 1; i < f.rows(); ++i) {
        std::copy(f.row(i).begin(), f.row(i).end(), out.row(i - 1).begin());
    }
    return out;
}

/// Drops the last layer.
inline LayerField apply_Rd(const LayerField& f) {
    detail::require_rows(f, 2, "apply_Rd");
    LayerField out(f.rows() - 1, f.cols());
    for (std::size_t i = 0; i + 1 < f.rows(); ++i) {
        std::copy(f.row(i).begin(), f.row(i).end(), out.row(i).begin());
    }
    return out;
}

/// Gamma F in O(N) per column via rho Gamma = rho_1 (TS)^t TS + S^t C S.
///
/// (TS)^t (TS F) = (SF)_1 * (1, ..., 1)^t, and S^t is a prefix sum, so
///   (Gamma F)_i = (rho_1 (SF)_1 + (1/N) sum_{2<=k<=i} (SF)_k) / rho_i.
inline LayerField apply_gamma_fast(const DensityGrid& grid, const LayerField& f) {
    const std::size_t n = grid.layers();
    if (f.rows() != n) {
        throw DimensionError("apply_gamma_fast: field has " + std::to_string(f.rows()) +
                             " layers, grid has " + std::to_string(n));
    }
    const LayerField sf = apply_S(f);
    const double w = 1.0 / static_cast<double>(n);
    const double rho1 = grid.rho(0);
    LayerField out(n, f.cols());
    std::vector<double> acc(f.cols());
    auto top = sf.row(0);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] = rho1 * top[j];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            auto s = sf.row(i);
            for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * s[j];
        }
        auto o = out.row(i);
        const double inv_rho = 1.0 / grid.rho(i);
        for (std::size_t j = 0; j < acc.size(); ++j) o[j] = acc[j] * inv_rho;
    }
    return out;
}

// Layer-vector forms.
inline LayerVector apply_S(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_S(x); }, f);
}
inline LayerVector apply_S0(std::span<const double> g) {
    return detail::on_vector([](const LayerField& x) { return apply_S0(x); }, g);
}
inline LayerVector apply_St(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_St(x); }, f);
}
inline LayerVector apply_Drho(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Drho(x); }, f);
}
inline LayerVector apply_Drho2(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Drho2(x); }, f);
}
inline LayerVector apply_Mavg(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Mavg(x); }, f);
}
inline LayerVector apply_Mavg2(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Mavg2(x); }, f);
}
inline LayerVector apply_T(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_T(x); }, f);
}
inline LayerVector apply_C(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_C(x); }, f);
}
inline LayerVector apply_Ru(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Ru(x); }, f);
}
inline LayerVector apply_Rd(std::span<const double> f) {
    return detail::on_vector([](const LayerField& x) { return apply_Rd(x); }, f);
}
inline LayerVector apply_gamma_fast(const DensityGrid& grid, std::span<const double> f) {
    return detail::on_vector([&grid](const LayerField& x) { return apply_gamma_fast(grid, x); }, f);
}

/// Restriction by sampling from a fine grid of N_fine = q * N_coarse layers, q odd.
/// Coarse midpoint i coincides with fine midpoint q*i + (q-1)/2.
inline LayerField restrict_layers(const LayerField& fine, std::size_t coarse_layers) {
    if (coarse_layers == 0 || fine.rows() % coarse_layers != 0) {
        throw DimensionError("restrict_layers: coarse layer count must divide the fine one");
    }
    const std::size_t q = fine.rows() / coarse_layers;
    if (q % 2 == 0) {
        throw DimensionError("restrict_layers: refinement ratio must be odd (got " + std::to_string(q) + ")");
    }
    LayerField out(coarse_layers, fine.cols());
    for (std::size_t i = 0; i < coarse_layers; ++i) {
        auto src = fine.row(q * i + (q - 1) / 2);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

} // namespace mlsw
