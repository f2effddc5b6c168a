#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "procml/error.hpp"
#include "procml/gpa.hpp"
#include "procml/landmark.hpp"
#include "procml/rng.hpp"

namespace procml {

struct SplitIndices {
    std::vector<int> train_ids;
    std::vector<int> test_ids;
    std::uint64_t seed = 0;
};

/// Uniformly random partition, deterministic in the seed.
/// Train side gets round(train_fraction * n) specimens.
inline SplitIndices split(int n, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidArgument("train_fraction must lie strictly between 0 and 1");
    if (n < 4)
        throw InvalidSplit("cannot split fewer than 4 specimens, got " +
                           std::to_string(n));
    const int train_n = static_cast<int>(std::lround(train_fraction * n));
    if (train_n < 1 || train_n > n - 1)
        throw InvalidSplit("split would leave one side empty (n=" +
                           std::to_string(n) + ", train=" +
                           std::to_string(train_n) + ")");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng(seed).shuffle(perm);

    SplitIndices idx;
    idx.seed = seed;
    idx.train_ids.assign(perm.begin(), perm.begin() + train_n);
    idx.test_ids.assign(perm.begin() + train_n, perm.end());
    std::sort(idx.train_ids.begin(), idx.train_ids.end());
    std::sort(idx.test_ids.begin(), idx.test_ids.end());
    return idx;
}

struct SplitAlignment {
    std::vector<LandmarkConfig> train;
    std::vector<LandmarkConfig> test;
    LandmarkConfig reference;
};

/* Leakage-free alignment.  The reference is fit on the training sample only;
 * each test specimen is centered on its own landmarks, scaled by its own
 * centroid size, and rotated onto the frozen reference in a single step.
 * Training outputs are a pure function of the training sample.
 */
inline SplitAlignment align_clean(const std::vector<LandmarkConfig>& train,
                                  const std::vector<LandmarkConfig>& test,
                                  const GpaOptions& opt = {}) {
    AlignmentResult fit = gpa(train, opt);
    const Matrix& ref = fit.reference.coords();

    std::vector<LandmarkConfig> aligned_test;
    aligned_test.reserve(test.size());
    for (const LandmarkConfig& cfg : test) {
        if (cfg.landmark_count() != fit.reference.landmark_count() ||
            cfg.dimension() != fit.reference.dimension())
            throw ShapeMismatch("test specimen does not match the training shape");
        Matrix x = cfg.coords();
        x.rowwise() -= opt.robust ? detail::column_medians(x)
                                  : detail::column_means(x);
        const double size = detail::centroid_size_of(x);
        if (detail::is_degenerate_size(size, x))
            throw DegenerateShape("test specimen with zero centroid size");
        if (opt.scale)
            x /= size;
        x *= detail::rotation_onto(x, ref);
        aligned_test.emplace_back(std::move(x));
    }
    return SplitAlignment{std::move(fit.aligned), std::move(aligned_test),
                          std::move(fit.reference)};
}

namespace detail {

inline void check_split_indices(const SplitIndices& idx, int n) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    auto mark = [&](int id) {
        if (id < 0 || id >= n)
            throw InvalidSplit("specimen index " + std::to_string(id) +
                               " out of range for n=" + std::to_string(n));
        if (seen[static_cast<std::size_t>(id)]++)
            throw InvalidSplit("specimen index " + std::to_string(id) +
                               " appears twice in the split");
    };
    for (int id : idx.train_ids)
        mark(id);
    for (int id : idx.test_ids)
        mark(id);
    if (idx.train_ids.size() + idx.test_ids.size() != static_cast<std::size_t>(n))
        throw InvalidSplit("split does not cover the sample");
}

} // namespace detail

/// The contaminated alternative: superimpose everything, then partition the
/// aligned outputs.  Test data has influenced every training coordinate.
inline SplitAlignment align_contaminated(const std::vector<LandmarkConfig>& all,
                                         const SplitIndices& idx,
                                         const GpaOptions& opt = {}) {
    detail::check_split_indices(idx, static_cast<int>(all.size()));
    AlignmentResult fit = gpa(all, opt);

    std::vector<LandmarkConfig> train, test;
    train.reserve(idx.train_ids.size());
    test.reserve(idx.test_ids.size());
    for (int id : idx.train_ids)
        train.push_back(fit.aligned[static_cast<std::size_t>(id)]);
    for (int id : idx.test_ids)
        test.push_back(fit.aligned[static_cast<std::size_t>(id)]);
    return SplitAlignment{std::move(train), std::move(test),
                          std::move(fit.reference)};
}

} // namespace procml
