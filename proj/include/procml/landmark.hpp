#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "procml/error.hpp"

namespace procml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

namespace detail {

inline RowVector column_means(const Matrix& m) { return m.colwise().mean(); }

inline RowVector column_medians(const Matrix& m) {
    RowVector med(m.cols());
    std::vector<double> buf(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            buf[static_cast<std::size_t>(r)] = m(r, c);
        std::sort(buf.begin(), buf.end());
        const std::size_t h = buf.size() / 2;
        med(c) = (buf.size() % 2 == 1) ? buf[h] : 0.5 * (buf[h - 1] + buf[h]);
    }
    return med;
}

inline double centroid_size_of(const Matrix& coords) {
    return (coords.rowwise() - column_means(coords)).norm();
}

inline bool is_degenerate_size(double size, const Matrix& coords) {
    const double scale = std::max(1.0, coords.cwiseAbs().maxCoeff());
    return !(size > 1e-12 * scale);
}

/* Rotation minimizing |S R - T|_F over SO(k).
 *
 * With M = S^t T = U D V^t the unconstrained optimum is U V^t; forcing
 * det(R) = +1 flips the sign of the smallest singular direction, so
 * R = U diag(1, ..., 1, det(U V^t)) V^t.  Reflections are never produced.
 */
inline Matrix rotation_onto(const Matrix& source, const Matrix& target) {
    const Matrix m = source.transpose() * target;
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix& u = svd.matrixU();
    const Matrix& v = svd.matrixV();
    const double sign = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    Vector d = Vector::Ones(m.cols());
    d(m.cols() - 1) = sign;
    return u * d.asDiagonal() * v.transpose();
}

} // namespace detail

/// One specimen: p landmarks in k dimensions, row j = landmark j.
/// Construction enforces p >= 3, k in {2, 3}, and finite coordinates.
class LandmarkConfig {
  public:
    explicit LandmarkConfig(Matrix coords) : coords_(std::move(coords)) {
        if (coords_.rows() < 3)
            throw InvalidSpec("landmark configuration needs at least 3 landmarks, got " +
                              std::to_string(coords_.rows()));
        if (coords_.cols() != 2 && coords_.cols() != 3)
            throw InvalidSpec("landmark dimension must be 2 or 3, got " +
                              std::to_string(coords_.cols()));
        if (!coords_.allFinite())
            throw InvalidSpec("landmark coordinates must be finite");
    }

    int landmark_count() const { return static_cast<int>(coords_.rows()); }
    int dimension() const { return static_cast<int>(coords_.cols()); }
    const Matrix& coords() const { return coords_; }

  private:
    Matrix coords_;
};

/// Similarity map x -> scale * x * rotation + translation.
/// rotation must be a proper rotation (orthogonal, det +1), scale positive.
class SimilarityTransform {
  public:
    SimilarityTransform(Matrix rotation, double scale, RowVector translation)
        : rotation_(std::move(rotation)), scale_(scale),
          translation_(std::move(translation)) {
        const auto k = rotation_.rows();
        if (k != rotation_.cols() || k != translation_.cols() || (k != 2 && k != 3))
            throw InvalidSpec("similarity transform dimensions are inconsistent");
        const double ortho_err =
            (rotation_.transpose() * rotation_ - Matrix::Identity(k, k))
                .cwiseAbs()
                .maxCoeff();
        if (ortho_err > 1e-10)
            throw InvalidSpec("rotation matrix is not orthogonal");
        if (std::abs(rotation_.determinant() - 1.0) > 1e-10)
            throw InvalidSpec("rotation matrix must have determinant +1");
        if (!(scale_ > 0.0))
            throw InvalidSpec("scale must be positive");
    }

    static SimilarityTransform identity(int dim) {
        return SimilarityTransform(Matrix::Identity(dim, dim), 1.0,
                                   RowVector::Zero(dim));
    }

    const Matrix& rotation() const { return rotation_; }
    double scale() const { return scale_; }
    const RowVector& translation() const { return translation_; }

    LandmarkConfig apply(const LandmarkConfig& config) const {
        if (config.dimension() != rotation_.rows())
            throw ShapeMismatch("transform dimension does not match configuration");
        Matrix out = scale_ * config.coords() * rotation_;
        out.rowwise() += translation_;
        return LandmarkConfig(std::move(out));
    }

  private:
    Matrix rotation_;
    double scale_;
    RowVector translation_;
};

/// Centroid size: Frobenius norm of the mean-centered coordinates.
/// Degenerate configurations (all landmarks coincide) are rejected.
inline double centroid_size(const LandmarkConfig& config) {
    const double size = detail::centroid_size_of(config.coords());
    if (detail::is_degenerate_size(size, config.coords()))
        throw DegenerateShape("configuration has zero centroid size");
    return size;
}

/// Translate so the centroid statistic sits at the origin.
/// robust = false uses the coordinate-wise mean, robust = true the median.
inline LandmarkConfig center(const LandmarkConfig& config, bool robust = false) {
    const RowVector c = robust ? detail::column_medians(config.coords())
                               : detail::column_means(config.coords());
    return LandmarkConfig(config.coords().rowwise() - c);
}

/// Rotation carrying source onto target with minimal Frobenius error.
/// Both configurations are expected to be centered.
inline SimilarityTransform optimal_rotation(const LandmarkConfig& source,
                                            const LandmarkConfig& target) {
    if (source.landmark_count() != target.landmark_count() ||
        source.dimension() != target.dimension())
        throw ShapeMismatch("rotation requires matching landmark counts and dimensions");
    Matrix r = detail::rotation_onto(source.coords(), target.coords());
    return SimilarityTransform(std::move(r), 1.0,
                               RowVector::Zero(source.dimension()));
}

/// Shape distance: residual after centering, unit-size scaling, and optimal
/// rotation of a onto b.  Symmetric in its arguments.
inline double procrustes_distance(const LandmarkConfig& a, const LandmarkConfig& b) {
    if (a.landmark_count() != b.landmark_count() || a.dimension() != b.dimension())
        throw ShapeMismatch("distance requires matching landmark counts and dimensions");
    Matrix ca = a.coords().rowwise() - detail::column_means(a.coords());
    Matrix cb = b.coords().rowwise() - detail::column_means(b.coords());
    const double sa = ca.norm();
    const double sb = cb.norm();
    if (detail::is_degenerate_size(sa, a.coords()) ||
        detail::is_degenerate_size(sb, b.coords()))
        throw DegenerateShape("distance undefined for zero-size configuration");
    ca /= sa;
    cb /= sb;
    return (ca * detail::rotation_onto(ca, cb) - cb).norm();
}

/// Landmark-major flattening: (x1, y1[, z1], x2, y2[, z2], ...).
inline Vector vectorize(const LandmarkConfig& config) {
    const Matrix t = config.coords().transpose();
    return Eigen::Map<const Vector>(t.data(), t.size());
}

/// Inverse of vectorize for a p * k coordinate vector.
inline LandmarkConfig devectorize(const Vector& values, int landmark_count, int dim) {
    if (values.size() != static_cast<Eigen::Index>(landmark_count) * dim)
        throw ShapeMismatch("vector length does not equal landmark_count * dim");
    Matrix t = Eigen::Map<const Matrix>(values.data(), dim, landmark_count);
    return LandmarkConfig(t.transpose());
}

} // namespace procml
