#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "features.hpp"
#include "linalg.hpp"

namespace pvcast::models {

struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;
    double ridge_lambda = 0.0;
    std::vector<std::string> feature_order;

    double predict_row(std::span<const double> x) const {
        double y = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) y += weights[j] * x[j];
        return y;
    }

    void validate() const {
        if (weights.size() != feature_order.size())
            throw PreconditionError("linear model weights/feature_order length mismatch");
        if (!std::isfinite(bias) || !(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
            throw PreconditionError("linear model has non-finite parameters");
        for (double w : weights)
            if (!std::isfinite(w)) throw PreconditionError("linear model has non-finite parameters");
    }

    friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

inline constexpr double kSuggestedRidge = 1e-8;

namespace detail {

// Relative pivot floor below which an unregularized Gram matrix counts as singular.
inline constexpr double kSingularPivot = 1e-12;

}  // namespace detail

// Solves (A^T A + lambda I) beta = A^T y where A is the design matrix with a
// trailing intercept column; lambda applies to the intercept as well. One
// step of iterative refinement follows the Cholesky solve.
inline LinearModel fit_linear(const features::FeatureMatrix& train, double ridge_lambda = 0.0) {
    if (train.empty()) throw EmptyDatasetError("fit_linear: empty training set");
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
        throw PreconditionError("ridge_lambda must be a finite non-negative number");
    const std::size_t p = train.cols();
    const std::size_t n = p + 1;
    linalg::SquareMatrix gram(n);
    std::vector<double> rhs(n, 0.0);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < train.rows(); ++i) {
        auto x = train.row(i);
        std::copy(x.begin(), x.end(), a.begin());
        a[p] = 1.0;
        const double y = train.target()[i];
        if (!std::isfinite(y)) throw PreconditionError("fit_linear: non-finite target");
        for (std::size_t r = 0; r < n; ++r) {
            if (!std::isfinite(a[r])) throw PreconditionError("fit_linear: non-finite feature");
            rhs[r] += a[r] * y;
            for (std::size_t c = 0; c <= r; ++c) gram(r, c) += a[r] * a[c];
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < r; ++c) gram(c, r) = gram(r, c);
        gram(r, r) += ridge_lambda;
    }

    auto chol = linalg::cholesky(gram, ridge_lambda > 0.0 ? 0.0 : detail::kSingularPivot);
    if (!chol)
        throw SingularMatrixError("singular Gram matrix; refit with a ridge penalty (e.g. ridge_lambda = " +
                                  text::format_double(kSuggestedRidge) + ")");
    auto beta = linalg::cholesky_solve(*chol, rhs);
    auto gb = linalg::multiply(gram, beta);
    std::vector<double> resid(n);
    for (std::size_t r = 0; r < n; ++r) resid[r] = rhs[r] - gb[r];
    auto delta = linalg::cholesky_solve(*chol, resid);
    for (std::size_t r = 0; r < n; ++r) beta[r] += delta[r];

    LinearModel m;
    m.weights.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(p));
    m.bias = beta[p];
    m.ridge_lambda = ridge_lambda;
    m.feature_order = train.columns();
    m.validate();
    return m;
}

inline std::vector<double> predict(const LinearModel& model, const features::FeatureMatrix& m) {
    if (model.feature_order != m.columns())
        throw ColumnMismatchError("model feature order does not match matrix columns");
    std::vector<double> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) out[i] = model.predict_row(m.row(i));
    return out;
}

inline double mean_squared_error(std::span<const double> pred, std::span<const double> target) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - target[i]) * (pred[i] - target[i]);
    return pred.empty() ? 0.0 : s / static_cast<double>(pred.size());
}

}  // namespace pvcast::models
