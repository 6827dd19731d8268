#pragma once

// Gauss-Legendre rules and an adaptive bisection driver for integrands that
// are smooth on each piece of a caller-supplied partition.

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlsw/error.hpp"

namespace mlsw {

class GaussLegendre {
public:
    explicit GaussLegendre(std::size_t order = 12) : nodes_(order), weights_(order) {
        if (order < 1) throw std::invalid_argument("GaussLegendre: order must be >= 1");
        const std::size_t n = order;
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(n) + 0.5));
            double dp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0;
                double p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) p0 = 1.0;
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute derivative at the converged node.
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes_[i] = -x;
            nodes_[n - 1 - i] = x;
            weights_[i] = w;
            weights_[n - 1 - i] = w;
        }
        if (n % 2 == 1) nodes_[n / 2] = 0.0;
    }

    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

    /// Fixed-order rule on [a, b]; also returns the integral of |f| in *abs_integral.
    template <class Fn>
    double integrate(Fn&& f, double a, double b, double* abs_integral = nullptr) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double acc = 0.0;
        double acc_abs = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double v = f(mid + half * nodes_[i]);
            acc += weights_[i] * v;
            acc_abs += weights_[i] * std::abs(v);
        }
        if (abs_integral != nullptr) *abs_integral = std::abs(half) * acc_abs;
        return half * acc;
    }

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

struct AdaptiveOptions {
    double rel_tol = 1e-12;
    int max_depth = 40;
    std::size_t order = 12;
};

namespace detail {

template <class Fn>
double adaptive_piece(const GaussLegendre& rule, Fn& f, double a, double b, double whole,
                      const AdaptiveOptions& opt, int depth) {
    const double mid = 0.5 * (a + b);
    double abs_left = 0.0;
    double abs_right = 0.0;
    const double left = rule.integrate(f, a, mid, &abs_left);
    const double right = rule.integrate(f, mid, b, &abs_right);
    const double refined = left + right;
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (abs_left + abs_right);
    if (std::abs(refined - whole) <= std::max(opt.rel_tol * std::abs(refined), floor)) {
        return refined;
    }
    if (depth >= opt.max_depth) {
        throw QuadratureError("adaptive Gauss-Legendre did not converge on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
    }
    return adaptive_piece(rule, f, a, mid, left, opt, depth + 1) +
           adaptive_piece(rule, f, mid, b, right, opt, depth + 1);
}

} // namespace detail

/// Adaptive Gauss-Legendre on [a, b]; f must be smooth there.
template <class Fn>
double integrate_adaptive(Fn&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    if (a == b) return 0.0;
    const GaussLegendre rule(opt.order);
    const double whole = rule.integrate(f, a, b);
    return detail::adaptive_piece(rule, f, a, b, whole, opt, 0);
}

/// Adaptive integration over [breaks.front(), breaks.back()], split at every break point.
template <class Fn>
double integrate_piecewise(Fn&& f, std::span<const double> breaks, const AdaptiveOptions& opt = {}) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        total += integrate_adaptive(f, breaks[i], breaks[i + 1], opt);
    }
    return total;
}

} // namespace mlsw
