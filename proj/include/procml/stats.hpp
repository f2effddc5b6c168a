#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "procml/error.hpp"
#include "procml/gpa.hpp"
#include "procml/landmark.hpp"
#include "procml/rng.hpp"
#include "procml/simulate.hpp"

namespace procml {

struct FitResult {
    Vector coefficients;
    double intercept = 0.0;
    double train_rmse = 0.0;
};

inline double rmse(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ShapeMismatch("rmse needs vectors of equal length");
    if (y_true.size() == 0)
        throw EmptySample("rmse undefined for empty vectors");
    return std::sqrt((y_pred - y_true).squaredNorm() /
                     static_cast<double>(y_true.size()));
}

inline Vector predict(const FitResult& fit, const Matrix& X) {
    if (X.cols() != fit.coefficients.size())
        throw ShapeMismatch("design width does not match coefficient length");
    return (X * fit.coefficients).array() + fit.intercept;
}

/// Least squares with intercept.  The slope block is solved on centered data
/// through a rank-revealing factorization, so rank-deficient designs get the
/// minimum-norm solution instead of an exception.
inline FitResult ols_fit(const Matrix& X, const Vector& y) {
    if (X.rows() == 0 || y.size() == 0)
        throw EmptySample("cannot fit on an empty sample");
    if (X.rows() != y.size())
        throw ShapeMismatch("design rows do not match response length");

    const RowVector x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Matrix xc = X.rowwise() - x_mean;
    const Vector yc = y.array() - y_mean;

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
    FitResult fit;
    fit.coefficients = cod.solve(yc);
    fit.intercept = y_mean - x_mean * fit.coefficients;
    fit.train_rmse = rmse(y, predict(fit, X));
    return fit;
}

struct PcaResult {
    Matrix scores;           // n x r, U * Sigma
    Matrix loadings;         // d x r, V
    Vector singular_values;  // length r, nonincreasing
    Vector eigenvalues;      // sigma_i^2 / (n - 1)
    RowVector mean_vector;   // length d
};

/// SVD of the column-centered data; r = min(n - 1, d) components retained.
inline PcaResult pca(const Matrix& X) {
    if (X.rows() < 2)
        throw EmptySample("pca needs at least 2 rows");
    const Eigen::Index n = X.rows();
    const Eigen::Index r = std::min(n - 1, X.cols());

    PcaResult res;
    res.mean_vector = X.colwise().mean();
    Matrix xc = X.rowwise() - res.mean_vector;
    Eigen::BDCSVD<Matrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    res.singular_values = svd.singularValues().head(r);
    res.scores = svd.matrixU().leftCols(r) * res.singular_values.asDiagonal();
    res.loadings = svd.matrixV().leftCols(r);
    res.eigenvalues =
        res.singular_values.array().square() / static_cast<double>(n - 1);
    return res;
}

/// Fraction of total variance carried by the leading m components.
inline double cumulative_variance(const PcaResult& res, int m) {
    const int r = static_cast<int>(res.eigenvalues.size());
    if (m < 1 || m > r)
        throw InvalidArgument("component count " + std::to_string(m) +
                              " outside 1.." + std::to_string(r));
    const double total = res.eigenvalues.sum();
    if (!(total > 0.0))
        throw DegenerateShape("spectrum has no variance");
    return res.eigenvalues.head(m).sum() / total;
}

/// Dimension left after removing translation, rotation, and size:
/// kp - k - k(k-1)/2 - 1.
inline int tangent_dimension(int p, int k) {
    if (p < 3)
        throw InvalidSpec("tangent dimension needs at least 3 landmarks");
    if (k != 2 && k != 3)
        throw InvalidSpec("dimension must be 2 or 3");
    return k * p - k - k * (k - 1) / 2 - 1;
}

struct IsotropyCheck {
    double expected_slope = 0.0;  // alpha / (k + 1), the predicted V(alpha p)
    double empirical_slope = 0.0; // observed V(round(alpha * p))
    int nonzero_eigenvalues = 0;  // relative threshold 1e-9
    int tangent_dim = 0;
    int components_used = 0;
};

/* Null experiment for the cumulative-variance slope.  Isotropic Gaussian
 * perturbations of the base shape are superimposed with scaling, the aligned
 * coordinates decomposed, and V(alpha * p) compared with the alpha / (k + 1)
 * prediction.  The count of nonzero eigenvalues is reported next to the
 * tangent dimension so the two claims can be checked independently.
 *
 * The default noise is small because the size constraint is a sphere, not a
 * hyperplane: its curvature leaks a radial eigenvalue of order noise^2
 * relative to the tangent ones, and only the small-noise limit pushes that
 * leak below the nonzero-eigenvalue threshold.
 */
inline IsotropyCheck isotropy_null_check(int p, int k, int n, double alpha,
                                         std::uint64_t seed,
                                         double noise_sd = 1e-5) {
    if (n < 2)
        throw EmptySample("isotropy check needs at least 2 specimens");
    if (!(alpha > 0.0))
        throw InvalidArgument("alpha must be positive");

    const Matrix base = base_shape(p, k).coords();
    const Rng root(seed);
    std::vector<LandmarkConfig> configs;
    configs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        Matrix x = base;
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < k; ++c)
                x(r, c) += rng.normal(0.0, noise_sd);
        configs.emplace_back(std::move(x));
    }

    AlignmentResult res = gpa(configs);
    Matrix data(n, p * k);
    for (int i = 0; i < n; ++i)
        data.row(i) = vectorize(res.aligned[static_cast<std::size_t>(i)]);

    PcaResult pr = pca(data);
    IsotropyCheck out;
    out.tangent_dim = tangent_dimension(p, k);
    out.expected_slope = alpha / static_cast<double>(k + 1);

    const int r = static_cast<int>(pr.eigenvalues.size());
    const int m = std::clamp(static_cast<int>(std::lround(alpha * p)), 1, r);
    out.components_used = m;
    out.empirical_slope = cumulative_variance(pr, m);

    const double top = pr.eigenvalues(0);
    for (int i = 0; i < r; ++i)
        if (pr.eigenvalues(i) > 1e-9 * top)
            ++out.nonzero_eigenvalues;
    return out;
}

struct BootstrapCi {
    double mean = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

namespace detail {

/// Quantile with linear interpolation between order statistics.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
    const std::size_t n = sorted.size();
    if (n == 1)
        return sorted[0];
    const double h = prob * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n)
        return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

/// Percentile bootstrap for the mean.
inline BootstrapCi bootstrap_ci(const std::vector<double>& values, double level,
                                int reps, std::uint64_t seed) {
    if (values.empty())
        throw EmptySample("bootstrap needs at least one value");
    if (!(level > 0.0 && level < 1.0))
        throw InvalidArgument("confidence level must lie in (0, 1)");
    if (reps < 1)
        throw InvalidArgument("bootstrap needs at least one resample");

    const std::size_t n = values.size();
    double total = 0.0;
    for (double v : values)
        total += v;

    Rng rng(seed);
    std::vector<double> means(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += values[rng.below(n)];
        means[static_cast<std::size_t>(r)] = s / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());

    BootstrapCi ci;
    ci.mean = total / static_cast<double>(n);
    ci.lower = detail::quantile_sorted(means, 0.5 * (1.0 - level));
    ci.upper = detail::quantile_sorted(means, 1.0 - 0.5 * (1.0 - level));
    return ci;
}

} // namespace procml
