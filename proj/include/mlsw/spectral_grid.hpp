#pragma once

// Periodic spectral grid on [0, L): DFT differentiation, Bessel-potential
// smoothing (1 - d^2/dx^2)^{s/2}, exact heat propagation and 2/3-rule dealiasing.
//
// Transform normalization: forward unscaled, inverse scaled by 1/M, so that
//   (1/M) sum_j f_j^2 == (1/M^2) sum_m |f^_m|^2.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlsw {

/// Values of one scalar function of x at the grid nodes.
using ScalarField = std::vector<double>;
using Spectrum = std::vector<std::complex<double>>;

namespace detail {

// The FFTW planner is not reentrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

inline RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
inline ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

class FftPlans {
public:
    explicit FftPlans(std::size_t m) {
        auto in = alloc_real(m);
        auto out = alloc_complex(m / 2 + 1);
        std::lock_guard lock(fftw_planner_mutex());
        const int n = static_cast<int>(m);
        forward_ = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(n, out.get(), in.get(), FFTW_ESTIMATE);
        if (forward_ == nullptr || backward_ == nullptr) {
            throw std::runtime_error("FFTW plan creation failed");
        }
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }

    [[nodiscard]] fftw_plan forward() const noexcept { return forward_; }
    [[nodiscard]] fftw_plan backward() const noexcept { return backward_; }

private:
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace detail

class SpatialGrid {
public:
    static constexpr double default_length = 4.0 * std::numbers::pi;

    explicit SpatialGrid(double length = default_length, std::size_t points = 256)
        : length_(length), points_(points) {
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw std::invalid_argument("SpatialGrid: length must be positive and finite");
        }
        if (points < 8 || (points & (points - 1)) != 0) {
            throw std::invalid_argument("SpatialGrid: point count must be a power of two >= 8, got " +
                                        std::to_string(points));
        }
        plans_ = std::make_shared<const detail::FftPlans>(points);
    }

    [[nodiscard]] double length() const noexcept { return length_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_; }
    [[nodiscard]] std::size_t spectrum_size() const noexcept { return points_ / 2 + 1; }
    [[nodiscard]] double dx() const noexcept { return length_ / static_cast<double>(points_); }
    [[nodiscard]] double node(std::size_t j) const noexcept {
        return length_ * static_cast<double>(j) / static_cast<double>(points_);
    }
    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> x(points_);
        for (std::size_t j = 0; j < points_; ++j) x[j] = node(j);
        return x;
    }
    /// Angular wavenumber of r2c index m in [0, M/2].
    [[nodiscard]] double wavenumber(std::size_t m) const noexcept {
        return 2.0 * std::numbers::pi * static_cast<double>(m) / length_;
    }
    /// Highest retained index under the 2/3 rule.
    [[nodiscard]] std::size_t dealias_cutoff() const noexcept { return points_ / 3; }

    template <class Fn>
    [[nodiscard]] ScalarField sample(Fn&& fn) const {
        ScalarField f(points_);
        for (std::size_t j = 0; j < points_; ++j) f[j] = fn(node(j));
        return f;
    }

    [[nodiscard]] Spectrum forward(std::span<const double> f) const {
        check_size(f.size());
        auto in = detail::alloc_real(points_);
        auto out = detail::alloc_complex(spectrum_size());
        std::copy(f.begin(), f.end(), in.get());
        fftw_execute_dft_r2c(plans_->forward(), in.get(), out.get());
        Spectrum s(spectrum_size());
        for (std::size_t m = 0; m < s.size(); ++m) s[m] = {out[m][0], out[m][1]};
        return s;
    }

    [[nodiscard]] ScalarField inverse(std::span<const std::complex<double>> spec) const {
        if (spec.size() != spectrum_size()) {
            throw std::invalid_argument("SpatialGrid::inverse: spectrum size mismatch");
        }
        auto in = detail::alloc_complex(spectrum_size());
        auto out = detail::alloc_real(points_);
        for (std::size_t m = 0; m < spec.size(); ++m) {
            in[m][0] = spec[m].real();
            in[m][1] = spec[m].imag();
        }
        fftw_execute_dft_c2r(plans_->backward(), in.get(), out.get());
        const double scale = 1.0 / static_cast<double>(points_);
        ScalarField f(points_);
        for (std::size_t j = 0; j < points_; ++j) f[j] = out[j] * scale;
        return f;
    }

    /// Applies a mode-wise multiplier mult(m, k_m) on r2c indices.
    template <class Multiplier>
    [[nodiscard]] ScalarField apply_multiplier(std::span<const double> f, Multiplier&& mult) const {
        Spectrum s = forward(f);
        for (std::size_t m = 0; m < s.size(); ++m) s[m] *= mult(m, wavenumber(m));
        return inverse(s);
    }

    /// Spectral derivative; the Nyquist mode of the result is zero.
    [[nodiscard]] ScalarField ddx(std::span<const double> f) const {
        const std::size_t nyquist = points_ / 2;
        return apply_multiplier(f, [nyquist](std::size_t m, double k) {
            return m == nyquist ? std::complex<double>{0.0, 0.0} : std::complex<double>{0.0, k};
        });
    }

    /// Lambda^s = (Id - d^2/dx^2)^{s/2}; any real s.
    [[nodiscard]] ScalarField lambda_s(std::span<const double> f, double s) const {
        if (s == 0.0) return ScalarField(f.begin(), f.end());
        return apply_multiplier(f, [s](std::size_t, double k) {
            return std::complex<double>{std::pow(1.0 + k * k, 0.5 * s), 0.0};
        });
    }

    /// Exact solution operator of f_t = kappa f_xx over a time dt.
    [[nodiscard]] ScalarField heat_step(std::span<const double> f, double kappa, double dt) const {
        if (kappa < 0.0 || dt < 0.0) {
            throw std::invalid_argument("heat_step: kappa and dt must be non-negative");
        }
        if (kappa == 0.0 || dt == 0.0) return ScalarField(f.begin(), f.end());
        return apply_multiplier(f, [kappa, dt](std::size_t, double k) {
            return std::complex<double>{std::exp(-kappa * k * k * dt), 0.0};
        });
    }

    /// 2/3 rule: modes with |m| > M/3 are removed.
    [[nodiscard]] ScalarField dealias(std::span<const double> f) const {
        const std::size_t cutoff = dealias_cutoff();
        return apply_multiplier(f, [cutoff](std::size_t m, double) {
            return std::complex<double>{m > cutoff ? 0.0 : 1.0, 0.0};
        });
    }

    /// ||d^d/dx^d Lambda^s f||_{L^2_x}^2 with the Riemann-sum convention dx * sum_j,
    /// evaluated by Parseval. The Nyquist mode is dropped when derivative > 0,
    /// matching ddx.
    [[nodiscard]] double sobolev_norm_squared(std::span<const double> f, double s,
                                              int derivative = 0) const {
        const Spectrum spec = forward(f);
        const std::size_t nyquist = points_ / 2;
        double acc = 0.0;
        for (std::size_t m = 0; m < spec.size(); ++m) {
            if (derivative > 0 && (m == 0 || m == nyquist)) continue;
            const double k = wavenumber(m);
            const double weight = (m == 0 || m == nyquist) ? 1.0 : 2.0;
            double mult = s == 0.0 ? 1.0 : std::pow(1.0 + k * k, s);
            for (int d = 0; d < derivative; ++d) mult *= k * k;
            acc += weight * mult * std::norm(spec[m]);
        }
        return dx() * acc / static_cast<double>(points_);
    }

private:
    void check_size(std::size_t n) const {
        if (n != points_) {
            throw std::invalid_argument("SpatialGrid: field has " + std::to_string(n) +
                                        " values, grid has " + std::to_string(points_));
        }
    }

    double length_;
    std::size_t points_;
    std::shared_ptr<const detail::FftPlans> plans_;
};

} // namespace mlsw
