#pragma once

// Dense matrix forms of the layer operators. Used as an oracle for the
// matrix-free kernels in layer_ops.hpp, never on the solver path.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mlsw/layer_ops.hpp"

namespace mlsw::dense {

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != cols) throw DimensionError("dense::Matrix::apply: length mismatch");
        std::vector<double> y(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }
};

inline Matrix multiply(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw DimensionError("dense::multiply: inner dimension mismatch");
    Matrix z(x.rows, y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t k = 0; k < x.cols; ++k) {
            const double xik = x(i, k);
            if (xik == 0.0) continue;
            for (std::size_t j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
        }
    }
    return z;
}

inline Matrix transpose(const Matrix& x) {
    Matrix t(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) t(j, i) = x(i, j);
    return t;
}

inline Matrix add(const Matrix& x, const Matrix& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw DimensionError("dense::add: shape mismatch");
    Matrix z = x;
    for (std::size_t n = 0; n < z.a.size(); ++n) z.a[n] += y.a[n];
    return z;
}

inline Matrix scaled(double s, Matrix x) {
    for (double& v : x.a) v *= s;
    return x;
}

inline Matrix diag(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

inline Matrix S(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = 1.0 / static_cast<double>(n);
    return m;
}

inline Matrix T(std::size_t n) {
    Matrix m(n, n);
    m(0, 0) = std::sqrt(static_cast<double>(n));
    return m;
}

inline Matrix C(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 1; i < n; ++i) m(i, i) = 1.0;
    return m;
}

/// Gamma_ij = (1/N) min(rho_i, rho_j) / rho_i.
inline Matrix gamma(const DensityGrid& grid) {
    const std::size_t n = grid.layers();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = std::min(grid.rho(i), grid.rho(j)) / grid.rho(i) / static_cast<double>(n);
    return m;
}

/// rho_1 (TS)^t (TS) + S^t C S, assembled from the dense factors.
inline Matrix gamma_decomposition(const DensityGrid& grid) {
    const std::size_t n = grid.layers();
    const Matrix s = S(n);
    const Matrix ts = multiply(T(n), s);
    const Matrix trace_part = scaled(grid.rho(0), multiply(transpose(ts), ts));
    const Matrix interior = multiply(transpose(s), multiply(C(n), s));
    return add(trace_part, interior);
}

} // namespace mlsw::dense

namespace mlsw {

/// Dense Gamma matrix.
inline dense::Matrix gamma_dense(const DensityGrid& grid) { return dense::gamma(grid); }

} // namespace mlsw
