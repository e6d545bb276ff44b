#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

namespace ovo::linalg {

/// Minimal dense row-major matrix for the small systems this library solves.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns nullopt when a pivot is (numerically) zero.
inline std::optional<std::vector<double>> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                pivot = r;
            }
        }
        if (best < 1e-300 || !std::isfinite(best)) {
            return std::nullopt;
        }
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) {
                std::swap(a(col, c), a(pivot, c));
            }
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) {
                a(r, c) -= factor * a(col, c);
            }
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) {
            acc -= a(ri, c) * x[c];
        }
        x[ri] = acc / a(ri, ri);
        if (!std::isfinite(x[ri])) {
            return std::nullopt;
        }
    }
    return x;
}

} // namespace ovo::linalg
