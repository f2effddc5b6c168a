#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "procml/error.hpp"
#include "procml/io.hpp"
#include "procml/landmark.hpp"

namespace procml {

struct GpaOptions {
    bool robust = false; // median centering and median reference
    bool scale = true;   // normalize every configuration to unit centroid size
    double tol = 1e-10;  // convergence threshold on the objective decrease
    int max_iter = 200;
};

struct AlignmentResult {
    std::vector<LandmarkConfig> aligned;
    LandmarkConfig reference;
    // objective before any sweep, then one value per completed sweep
    std::vector<double> objective_history;
    int iterations = 0;
    bool converged = false;
    bool scaled = false;
    bool robust = false;
};

namespace detail {

inline void check_same_shape(const std::vector<LandmarkConfig>& sample) {
    for (std::size_t i = 1; i < sample.size(); ++i)
        if (sample[i].landmark_count() != sample[0].landmark_count() ||
            sample[i].dimension() != sample[0].dimension())
            throw ShapeMismatch("configuration " + std::to_string(i) +
                                " does not match the sample shape");
}

inline Matrix stack_mean(const std::vector<Matrix>& xs) {
    Matrix m = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i)
        m += xs[i];
    return m / static_cast<double>(xs.size());
}

inline Matrix stack_median(const std::vector<Matrix>& xs) {
    Matrix m(xs[0].rows(), xs[0].cols());
    std::vector<double> buf(xs.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (std::size_t i = 0; i < xs.size(); ++i)
                buf[i] = xs[i](r, c);
            std::sort(buf.begin(), buf.end());
            const std::size_t h = buf.size() / 2;
            m(r, c) = (buf.size() % 2 == 1) ? buf[h] : 0.5 * (buf[h - 1] + buf[h]);
        }
    return m;
}

// Dispersion form of the objective: twice the summed squared distance to the
// arithmetic mean.  Equals the average of all ordered pairwise residuals.
inline double dispersion_q(const std::vector<Matrix>& xs) {
    const Matrix mean = stack_mean(xs);
    double s = 0.0;
    for (const Matrix& x : xs)
        s += (x - mean).squaredNorm();
    return 2.0 * s;
}

} // namespace detail

/// Objective evaluated from its definition: (1/n) sum over ordered pairs of
/// squared Frobenius residuals.  Quadratic cost, meant for validation.
inline double objective_q(const std::vector<LandmarkConfig>& configs) {
    if (configs.empty())
        throw EmptySample("objective undefined for an empty sample");
    detail::check_same_shape(configs);
    double s = 0.0;
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::size_t j = 0; j < configs.size(); ++j)
            s += (configs[i].coords() - configs[j].coords()).squaredNorm();
    return s / static_cast<double>(configs.size());
}

/* Generalized superimposition.
 *
 * Every configuration is centered once (mean, or median when robust), and
 * scaled to unit centroid size when scaling is on.  Each sweep then rotates
 * every configuration onto the current reference, updates the reference to
 * the coordinate-wise mean (or median), and re-normalizes sizes.  Sweeps stop
 * when the objective decrease falls below tol.  The initial reference is the
 * first configuration.
 */
inline AlignmentResult gpa(const std::vector<LandmarkConfig>& sample,
                           const GpaOptions& opt = {}) {
    if (sample.size() < 2)
        throw EmptySample("alignment requires at least 2 configurations, got " +
                          std::to_string(sample.size()));
    detail::check_same_shape(sample);
    if (opt.max_iter < 1)
        throw InvalidArgument("max_iter must be at least 1");
    if (!(opt.tol > 0.0))
        throw InvalidArgument("tol must be positive");

    const std::size_t n = sample.size();
    std::vector<Matrix> xs;
    xs.reserve(n);
    for (const LandmarkConfig& cfg : sample) {
        Matrix x = cfg.coords();
        x.rowwise() -= opt.robust ? detail::column_medians(x)
                                  : detail::column_means(x);
        const double size = detail::centroid_size_of(x);
        if (detail::is_degenerate_size(size, x))
            throw DegenerateShape("configuration with zero centroid size");
        if (opt.scale)
            x /= size;
        xs.push_back(std::move(x));
    }

    Matrix ref = xs[0];
    std::vector<double> history{detail::dispersion_q(xs)};
    int iterations = 0;
    bool converged = false;

    for (int iter = 1; iter <= opt.max_iter; ++iter) {
        if (opt.scale)
            for (Matrix& x : xs)
                x /= detail::centroid_size_of(x);
        for (Matrix& x : xs)
            x *= detail::rotation_onto(x, ref);
        ref = opt.robust ? detail::stack_median(xs) : detail::stack_mean(xs);

        const double q = detail::dispersion_q(xs);
        history.push_back(q);
        iterations = iter;
        if (std::abs(q - history[history.size() - 2]) < opt.tol) {
            converged = true;
            break;
        }
    }

    std::vector<LandmarkConfig> aligned;
    aligned.reserve(n);
    for (Matrix& x : xs)
        aligned.emplace_back(std::move(x));
    return AlignmentResult{std::move(aligned), LandmarkConfig(std::move(ref)),
                           std::move(history),  iterations,
                           converged,           opt.scale,
                           opt.robust};
}

/// Write an alignment to <dir>/aligned.txt, <dir>/reference.txt, and
/// <dir>/objective.csv (columns iter,q; iter 0 is the pre-sweep value).
inline void save_alignment(const std::string& dir, const AlignmentResult& result,
                           const std::vector<std::string>& ids = {}) {
    std::filesystem::create_directories(dir);
    write_landmark_file(dir + "/aligned.txt", result.aligned, ids);
    write_landmark_file(dir + "/reference.txt", {result.reference}, {"reference"});
    std::ofstream csv(dir + "/objective.csv");
    if (!csv)
        throw ParseError("cannot open for writing: " + dir + "/objective.csv");
    csv << "iter,q\n";
    for (std::size_t i = 0; i < result.objective_history.size(); ++i)
        csv << i << "," << format_double(result.objective_history[i]) << "\n";
}

} // namespace procml
