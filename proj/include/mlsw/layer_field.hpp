#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mlsw {

/// One value per layer.
using LayerVector = std::vector<double>;

/// Row-major (layers x nodes) array; row i holds layer i.
class LayerField {
public:
    LayerField() = default;
    LayerField(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    /// N x 1 field holding a layer vector.
    static LayerField column(std::span<const double> v) {
        LayerField f(v.size(), 1);
        std::copy(v.begin(), v.end(), f.data_.begin());
        return f;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }

    [[nodiscard]] std::vector<double> column_values(std::size_t j) const {
        std::vector<double> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    std::span<double> values() noexcept { return data_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

    LayerField& operator+=(const LayerField& o) {
        check_same_shape(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
        return *this;
    }
    LayerField& operator-=(const LayerField& o) {
        check_same_shape(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
        return *this;
    }
    LayerField& operator*=(double a) noexcept {
        for (double& v : data_) v *= a;
        return *this;
    }

    /// this += a * o
    LayerField& axpy(double a, const LayerField& o) {
        check_same_shape(o);
        for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += a * o.data_[n];
        return *this;
    }

    friend LayerField operator+(LayerField a, const LayerField& b) { return a += b; }
    friend LayerField operator-(LayerField a, const LayerField& b) { return a -= b; }
    friend LayerField operator*(double s, LayerField a) { return a *= s; }

    [[nodiscard]] double max_abs() const noexcept {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    [[nodiscard]] bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    bool operator==(const LayerField&) const = default;

private:
    void check_same_shape(const LayerField& o) const {
        if (o.rows_ != rows_ || o.cols_ != cols_) {
            throw std::invalid_argument("LayerField: shape mismatch");
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Entrywise product FG.
inline LayerField hadamard(const LayerField& f, const LayerField& g) {
    if (f.rows() != g.rows() || f.cols() != g.cols()) {
        throw std::invalid_argument("hadamard: shape mismatch");
    }
    LayerField out(f.rows(), f.cols());
    auto a = f.values();
    auto b = g.values();
    auto o = out.values();
    for (std::size_t n = 0; n < o.size(); ++n) o[n] = a[n] * b[n];
    return out;
}

inline LayerVector hadamard(std::span<const double> f, std::span<const double> g) {
    if (f.size() != g.size()) throw std::invalid_argument("hadamard: length mismatch");
    LayerVector out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * g[i];
    return out;
}

} // namespace mlsw
