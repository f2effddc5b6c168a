#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "procml/error.hpp"
#include "procml/io.hpp"
#include "procml/landmark.hpp"
#include "procml/rng.hpp"

namespace procml {

struct SimConfig {
    int n = 0;
    int p = 0;
    int k = 2;
    double sigma = 0.0;          // per-coordinate noise SD
    double shear_min = 0.0;      // specimen shear strengths span this range
    double shear_max = 0.0;
    double shear_noise_sd = 0.0;
    double rho = 1.0;            // size = z^rho + noise
    double size_noise_sd = 0.0;
    double z_min = 1.0;
    double z_max = 1.0;
    std::uint64_t seed = 0;
};

inline void validate(const SimConfig& cfg) {
    if (cfg.n < 1)
        throw InvalidSpec("specimen count must be positive");
    if (cfg.p < 3)
        throw InvalidSpec("landmark count must be at least 3");
    if (cfg.k != 2 && cfg.k != 3)
        throw InvalidSpec("dimension must be 2 or 3");
    if (!(cfg.sigma >= 0.0))
        throw InvalidSpec("sigma must be nonnegative");
    if (!(cfg.shear_noise_sd >= 0.0) || !(cfg.size_noise_sd >= 0.0))
        throw InvalidSpec("noise SDs must be nonnegative");
    if (!(cfg.rho >= 1.0))
        throw InvalidSpec("rho must be at least 1");
    if (cfg.shear_min > cfg.shear_max ||
        std::abs(cfg.shear_min + cfg.shear_max) >
            1e-12 * std::max(1.0, std::abs(cfg.shear_max)))
        throw InvalidSpec("shear range must be symmetric about zero");
    if (!(cfg.z_min > 0.0) || cfg.z_min > cfg.z_max)
        throw InvalidSpec("z range must be strictly positive and ordered");
}

struct ShapeSample {
    std::vector<LandmarkConfig> configs;
    std::vector<double> size_factors;  // s_i
    std::vector<double> shear_params;  // eps_i
    std::vector<double> z_values;      // z_i
    SimConfig config_used;
};

/// Template shape all specimens are perturbations of.  2D: p points spaced
/// equiangularly on the unit circle starting at (1, 0).  3D: the Fibonacci
/// sphere lattice, deterministic and near-uniform.
inline LandmarkConfig base_shape(int p, int k) {
    if (p < 3)
        throw InvalidSpec("base shape needs at least 3 landmarks");
    if (k == 2) {
        Matrix m(p, 2);
        for (int j = 0; j < p; ++j) {
            const double a = 2.0 * 3.14159265358979323846 * j / p;
            m(j, 0) = std::cos(a);
            m(j, 1) = std::sin(a);
        }
        return LandmarkConfig(std::move(m));
    }
    if (k != 3)
        throw InvalidSpec("dimension must be 2 or 3");
    Matrix m(p, 3);
    const double golden = 3.14159265358979323846 * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < p; ++j) {
        const double z = 1.0 - 2.0 * (j + 0.5) / p;
        const double r = std::sqrt(1.0 - z * z);
        m(j, 0) = r * std::cos(golden * j);
        m(j, 1) = r * std::sin(golden * j);
        m(j, 2) = z;
    }
    return LandmarkConfig(std::move(m));
}

namespace detail {

inline double linspace_at(double lo, double hi, int i, int n) {
    if (n < 2)
        return 0.5 * (lo + hi);
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

} // namespace detail

/* Generative model, per specimen i:
 *   1. add i.i.d. Gaussian noise (SD sigma) to every base coordinate,
 *   2. shear the first axis: x' = x + eps_i * y, other axes untouched,
 *      with eps_i = linspace over the shear range plus Gaussian jitter,
 *   3. scale all coordinates by s_i = z_i^rho + delta, z_i = linspace over
 *      the z range, delta ~ N(0, size_noise_sd^2) redrawn until s_i > 0.
 * Specimen i draws from substream i of the seed, in the order above, so the
 * sample is identical no matter how generation is scheduled.
 */
inline ShapeSample simulate(const SimConfig& cfg) {
    validate(cfg);
    const LandmarkConfig base = base_shape(cfg.p, cfg.k);
    const Rng root(cfg.seed);

    ShapeSample sample;
    sample.config_used = cfg;
    sample.configs.reserve(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) {
        Rng rng = root.substream(static_cast<std::uint64_t>(i));
        Matrix x = base.coords();
        for (int r = 0; r < cfg.p; ++r)
            for (int c = 0; c < cfg.k; ++c)
                x(r, c) += rng.normal(0.0, cfg.sigma);

        const double eps =
            detail::linspace_at(cfg.shear_min, cfg.shear_max, i, cfg.n) +
            rng.normal(0.0, cfg.shear_noise_sd);
        x.col(0) += eps * x.col(1);

        const double z = detail::linspace_at(cfg.z_min, cfg.z_max, i, cfg.n);
        double s;
        do {
            s = std::pow(z, cfg.rho) + rng.normal(0.0, cfg.size_noise_sd);
        } while (!(s > 0.0));
        x *= s;

        sample.configs.emplace_back(std::move(x));
        sample.size_factors.push_back(s);
        sample.shear_params.push_back(eps);
        sample.z_values.push_back(z);
    }
    return sample;
}

/// Baseline generator settings; n, p, k vary by experiment.
inline SimConfig default_config(int n, int p, int k) {
    SimConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.k = k;
    cfg.sigma = std::sqrt(0.5);
    cfg.shear_min = -0.75;
    cfg.shear_max = 0.75;
    cfg.shear_noise_sd = 0.05;
    cfg.rho = 4.0;
    cfg.size_noise_sd = 0.1;
    cfg.z_min = 1.0;
    cfg.z_max = 2.0;
    cfg.seed = 0;
    return cfg;
}

/// Six one-parameter variations of the baseline, used by the sensitivity runs.
inline std::vector<std::pair<std::string, SimConfig>>
sensitivity_presets(int n, int p, int k) {
    std::vector<std::pair<std::string, SimConfig>> presets;
    SimConfig cfg = default_config(n, p, k);

    cfg.shear_min = -0.1;
    cfg.shear_max = 0.1;
    presets.emplace_back("shear_low", cfg);
    cfg.shear_min = -1.4;
    cfg.shear_max = 1.4;
    presets.emplace_back("shear_high", cfg);

    cfg = default_config(n, p, k);
    cfg.rho = 2.0;
    presets.emplace_back("rho_low", cfg);
    cfg.rho = 5.0;
    presets.emplace_back("rho_high", cfg);

    cfg = default_config(n, p, k);
    cfg.sigma = 0.05;
    presets.emplace_back("sigma_low", cfg);
    cfg.sigma = 1.0;
    presets.emplace_back("sigma_high", cfg);
    return presets;
}

/// Per-specimen generative ground truth: id,z,epsilon,s,centroid_size.
inline void write_ground_truth(const std::string& path, const ShapeSample& sample) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    out << "id,z,epsilon,s,centroid_size\n";
    for (std::size_t i = 0; i < sample.configs.size(); ++i)
        out << i << "," << format_double(sample.z_values[i]) << ","
            << format_double(sample.shear_params[i]) << ","
            << format_double(sample.size_factors[i]) << ","
            << format_double(centroid_size(sample.configs[i])) << "\n";
}

} // namespace procml
