#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace pvcast::linalg {

// Dense row-major square matrix, sized for normal equations (a few dozen columns).
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    explicit SquareMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

// Lower-triangular Cholesky factor of a symmetric matrix. Returns nullopt
// when a pivot falls to or below `relative_tol` times the original diagonal
// entry, i.e. the matrix is not numerically positive definite.
inline std::optional<SquareMatrix> cholesky(const SquareMatrix& m, double relative_tol) {
    const std::size_t n = m.n;
    SquareMatrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > relative_tol * std::abs(m(j, j))) || !(d > 0.0)) return std::nullopt;
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

// Solves L L^T x = b.
inline std::vector<double> cholesky_solve(const SquareMatrix& l, std::span<const double> b) {
    const std::size_t n = l.n;
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
        y[i] /= l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        for (std::size_t k = ii + 1; k < n; ++k) y[ii] -= l(k, ii) * y[k];
        y[ii] /= l(ii, ii);
    }
    return y;
}

inline std::vector<double> multiply(const SquareMatrix& m, std::span<const double> x) {
    std::vector<double> out(m.n, 0.0);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) out[i] += m(i, j) * x[j];
    return out;
}

}  // namespace pvcast::linalg
