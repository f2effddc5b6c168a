#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "procml/landmark.hpp"
#include "procml/rng.hpp"

using namespace procml;

namespace {

Matrix rotation2(double theta) {
    Matrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

Matrix random_config(int p, int k, Rng& rng, double spread = 1.0) {
    Matrix m(p, k);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < k; ++j)
            m(i, j) = rng.normal(0.0, spread);
    return m;
}

// Independent check for 2D rotation problems: coarse-to-fine scan of the
// rotation angle, no linear algebra shared with the library path.
double grid_best_angle(const Matrix& source, const Matrix& target) {
    auto residual = [&](double theta) {
        return (source * rotation2(theta).transpose() - target).squaredNorm();
    };
    // source * R(theta)^t applies the column convention used by apply()
    double best = 0.0, best_val = residual(0.0);
    for (double t = 0.0; t < 6.2832; t += 1e-3) {
        const double v = residual(t);
        if (v < best_val) {
            best_val = v;
            best = t;
        }
    }
    for (double t = best - 2e-3; t <= best + 2e-3; t += 1e-7) {
        const double v = residual(t);
        if (v < best_val) {
            best_val = v;
            best = t;
        }
    }
    return best;
}

Matrix pentagon() {
    Matrix m(5, 2);
    for (int i = 0; i < 5; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / 5.0;
        m(i, 0) = std::cos(a);
        m(i, 1) = std::sin(a);
    }
    return m;
}

} // namespace

TEST_CASE("configuration construction validates shape", "[landmark]") {
    REQUIRE_NOTHROW(LandmarkConfig(Matrix::Random(3, 2)));
    REQUIRE_NOTHROW(LandmarkConfig(Matrix::Random(10, 3)));
    REQUIRE_THROWS_AS(LandmarkConfig(Matrix::Random(2, 2)), InvalidSpec);
    REQUIRE_THROWS_AS(LandmarkConfig(Matrix::Random(5, 4)), InvalidSpec);
    REQUIRE_THROWS_AS(LandmarkConfig(Matrix::Random(5, 1)), InvalidSpec);

    Matrix bad = Matrix::Zero(4, 2);
    bad(1, 1) = std::nan("");
    REQUIRE_THROWS_AS(LandmarkConfig(bad), InvalidSpec);
}

TEST_CASE("mean centering zeroes column means and is idempotent", "[landmark]") {
    Rng rng(1);
    LandmarkConfig cfg(random_config(9, 3, rng));
    LandmarkConfig c = center(cfg);
    REQUIRE(c.coords().colwise().mean().cwiseAbs().maxCoeff() < 1e-14);
    LandmarkConfig cc = center(c);
    REQUIRE((cc.coords() - c.coords()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("robust centering zeroes column medians", "[landmark]") {
    Matrix m(5, 2);
    m << 0, 0, 1, 2, 2, 4, 3, 6, 100, 200; // outlier pulls the mean, not the median
    LandmarkConfig c = center(LandmarkConfig(m), true);
    // median of {-2,-1,0,1,98} is 0
    REQUIRE(c.coords()(2, 0) == Catch::Approx(0.0).margin(1e-15));
    REQUIRE(c.coords()(2, 1) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("centroid size is translation invariant and scales linearly", "[landmark]") {
    Rng rng(2);
    Matrix m = random_config(7, 2, rng);
    const double s = centroid_size(LandmarkConfig(m));

    Matrix shifted = m;
    shifted.rowwise() += RowVector::Constant(2, 13.5);
    REQUIRE(centroid_size(LandmarkConfig(shifted)) == Catch::Approx(s).epsilon(1e-12));
    REQUIRE(centroid_size(LandmarkConfig(Matrix(3.0 * m))) ==
            Catch::Approx(3.0 * s).epsilon(1e-12));
}

TEST_CASE("centroid size of a hand-computed triangle", "[landmark]") {
    Matrix m(3, 2);
    m << 0, 0, 2, 0, 0, 2;
    // centroid (2/3, 2/3); squared distances 8/9 + 16/9... sum = 16/3
    REQUIRE(centroid_size(LandmarkConfig(m)) ==
            Catch::Approx(std::sqrt(16.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("coincident landmarks are degenerate", "[landmark]") {
    Matrix m = Matrix::Constant(6, 2, 4.0);
    REQUIRE_THROWS_AS(centroid_size(LandmarkConfig(m)), DegenerateShape);

    // large but identical coordinates leave only rounding residue
    Matrix big = Matrix::Constant(6, 3, 1e9);
    REQUIRE_THROWS_AS(centroid_size(LandmarkConfig(big)), DegenerateShape);
}

TEST_CASE("similarity transform validates its parts", "[landmark]") {
    Matrix reflect(2, 2);
    reflect << 1, 0, 0, -1;
    REQUIRE_THROWS_AS(SimilarityTransform(reflect, 1.0, RowVector::Zero(2)),
                      InvalidSpec);
    Matrix skew(2, 2);
    skew << 1, 0.3, 0, 1;
    REQUIRE_THROWS_AS(SimilarityTransform(skew, 1.0, RowVector::Zero(2)),
                      InvalidSpec);
    REQUIRE_THROWS_AS(
        SimilarityTransform(Matrix::Identity(2, 2), 0.0, RowVector::Zero(2)),
        InvalidSpec);
    REQUIRE_THROWS_AS(
        SimilarityTransform(Matrix::Identity(2, 2), -2.0, RowVector::Zero(2)),
        InvalidSpec);
    REQUIRE_NOTHROW(SimilarityTransform(rotation2(0.7), 2.0, RowVector::Ones(2)));
}

TEST_CASE("similarity transform application matches the map definition", "[landmark]") {
    Rng rng(3);
    Matrix m = random_config(6, 2, rng);
    const double theta = 0.37;
    RowVector t(2);
    t << -1.0, 2.5;
    SimilarityTransform st(rotation2(theta), 1.7, t);
    LandmarkConfig out = st.apply(LandmarkConfig(m));
    Matrix expect = 1.7 * m * rotation2(theta);
    expect.rowwise() += t;
    REQUIRE((out.coords() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("optimal rotation recovers a known 2D rotation", "[landmark]") {
    const double theta = 37.0 * 3.14159265358979323846 / 180.0;
    Matrix src = pentagon();
    Matrix dst = src * rotation2(theta);
    SimilarityTransform st = optimal_rotation(LandmarkConfig(src), LandmarkConfig(dst));
    REQUIRE((st.rotation() - rotation2(theta)).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(st.scale() == 1.0);
    REQUIRE(st.translation().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("optimal rotation agrees with an exhaustive angle scan", "[landmark]") {
    Rng rng(4);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a = random_config(8, 2, rng);
        Matrix b = random_config(8, 2, rng);
        a.rowwise() -= a.colwise().mean().eval();
        b.rowwise() -= b.colwise().mean().eval();

        SimilarityTransform st =
            optimal_rotation(LandmarkConfig(a), LandmarkConfig(b));
        const double analytic = (a * st.rotation() - b).squaredNorm();

        const double best_angle = grid_best_angle(a, b);
        const double scanned =
            (a * rotation2(best_angle).transpose() - b).squaredNorm();

        REQUIRE(analytic <= scanned + 1e-9);
        // the minimizing rotation itself must match the scan
        const double analytic_angle =
            std::atan2(st.rotation()(1, 0), st.rotation()(0, 0));
        double scan_angle = -best_angle; // scan used the transpose
        const double diff = std::remainder(analytic_angle - scan_angle,
                                           2.0 * 3.14159265358979323846);
        REQUIRE(std::abs(diff) < 1e-5);
    }
}

TEST_CASE("optimal rotation never produces a reflection", "[landmark]") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = trial % 2 == 0 ? 2 : 3;
        Matrix a = random_config(6, k, rng);
        Matrix b = a;
        b.col(0) *= -1.0; // mirrored target tempts an improper solution
        a.rowwise() -= a.colwise().mean().eval();
        b.rowwise() -= b.colwise().mean().eval();
        SimilarityTransform st =
            optimal_rotation(LandmarkConfig(a), LandmarkConfig(b));
        REQUIRE(st.rotation().determinant() == Catch::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("3D optimal rotation is locally optimal and proper", "[landmark]") {
    Rng rng(6);
    Matrix a = random_config(10, 3, rng);
    Matrix b = random_config(10, 3, rng);
    a.rowwise() -= a.colwise().mean().eval();
    b.rowwise() -= b.colwise().mean().eval();

    SimilarityTransform st = optimal_rotation(LandmarkConfig(a), LandmarkConfig(b));
    const Matrix& r = st.rotation();
    REQUIRE((r.transpose() * r - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(r.determinant() == Catch::Approx(1.0).epsilon(1e-12));

    const double base = (a * r - b).squaredNorm();
    for (int trial = 0; trial < 200; ++trial) {
        Vector axis(3);
        for (int i = 0; i < 3; ++i)
            axis(i) = rng.normal();
        axis.normalize();
        const double angle = 1e-3;
        Matrix w = Matrix::Zero(3, 3);
        w(0, 1) = -axis(2);
        w(0, 2) = axis(1);
        w(1, 0) = axis(2);
        w(1, 2) = -axis(0);
        w(2, 0) = -axis(1);
        w(2, 1) = axis(0);
        Matrix perturbed =
            r * (Matrix::Identity(3, 3) + std::sin(angle) * w +
                 (1.0 - std::cos(angle)) * w * w);
        REQUIRE((a * perturbed - b).squaredNorm() >= base - 1e-12);
    }
}

TEST_CASE("rotation rejects mismatched configurations", "[landmark]") {
    Rng rng(7);
    LandmarkConfig a(random_config(5, 2, rng));
    LandmarkConfig b(random_config(6, 2, rng));
    LandmarkConfig c(random_config(5, 3, rng));
    REQUIRE_THROWS_AS(optimal_rotation(a, b), ShapeMismatch);
    REQUIRE_THROWS_AS(optimal_rotation(a, c), ShapeMismatch);
    REQUIRE_THROWS_AS(procrustes_distance(a, b), ShapeMismatch);
}

TEST_CASE("procrustes distance vanishes under similarity maps", "[landmark]") {
    Rng rng(8);
    Matrix m = random_config(12, 2, rng);
    RowVector t(2);
    t << 4.0, -7.0;
    SimilarityTransform st(rotation2(1.1), 0.3, t);
    LandmarkConfig original(m);
    LandmarkConfig moved = st.apply(original);
    REQUIRE(procrustes_distance(original, moved) < 1e-12);

    Matrix m3 = random_config(12, 3, rng);
    LandmarkConfig original3(m3);
    LandmarkConfig scaled3(Matrix(2.5 * m3));
    REQUIRE(procrustes_distance(original3, scaled3) < 1e-12);
}

TEST_CASE("procrustes distance is symmetric", "[landmark]") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const int k = trial % 2 == 0 ? 2 : 3;
        LandmarkConfig a(random_config(7, k, rng));
        LandmarkConfig b(random_config(7, k, rng));
        const double dab = procrustes_distance(a, b);
        const double dba = procrustes_distance(b, a);
        REQUIRE(std::abs(dab - dba) < 1e-12);
        REQUIRE(dab >= 0.0);
        REQUIRE(dab <= 2.0);
    }
}

TEST_CASE("procrustes distance matches an exhaustive angle scan", "[landmark]") {
    Rng rng(10);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a = random_config(6, 2, rng);
        Matrix b = random_config(6, 2, rng);
        const double d = procrustes_distance(LandmarkConfig(a), LandmarkConfig(b));

        Matrix ca = a.rowwise() - a.colwise().mean();
        Matrix cb = b.rowwise() - b.colwise().mean();
        ca /= ca.norm();
        cb /= cb.norm();
        double best = std::numeric_limits<double>::max();
        for (double theta = 0.0; theta < 6.2832; theta += 1e-4) {
            const double v = (ca * rotation2(theta) - cb).norm();
            best = std::min(best, v);
        }
        REQUIRE(d <= best + 1e-9);
        REQUIRE(d >= best - 1e-4);
    }
}

TEST_CASE("degenerate configurations cannot be compared", "[landmark]") {
    Matrix flat = Matrix::Constant(5, 2, 1.0);
    Matrix fine(5, 2);
    fine << 0, 0, 1, 0, 1, 1, 0, 1, 0.5, 0.5;
    REQUIRE_THROWS_AS(
        procrustes_distance(LandmarkConfig(flat), LandmarkConfig(fine)),
        DegenerateShape);
}

TEST_CASE("vectorize uses landmark-major order and round-trips", "[landmark]") {
    Matrix m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    Vector v = vectorize(LandmarkConfig(m));
    REQUIRE(v.size() == 6);
    for (int i = 0; i < 6; ++i)
        REQUIRE(v(i) == static_cast<double>(i + 1));

    LandmarkConfig back = devectorize(v, 3, 2);
    REQUIRE((back.coords() - m).cwiseAbs().maxCoeff() == 0.0);

    Matrix m3(4, 3);
    m3 << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
    Vector v3 = vectorize(LandmarkConfig(m3));
    REQUIRE(v3(0) == 1.0);
    REQUIRE(v3(2) == 3.0);
    REQUIRE(v3(3) == 4.0);
    LandmarkConfig back3 = devectorize(v3, 4, 3);
    REQUIRE((back3.coords() - m3).cwiseAbs().maxCoeff() == 0.0);

    REQUIRE_THROWS_AS(devectorize(v3, 3, 3), ShapeMismatch);
}
