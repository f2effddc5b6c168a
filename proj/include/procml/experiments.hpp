#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "procml/gpa.hpp"
#include "procml/gradmodels.hpp"
#include "procml/io.hpp"
#include "procml/parallel.hpp"
#include "procml/simulate.hpp"
#include "procml/split.hpp"
#include "procml/stats.hpp"

namespace procml {

/// One row of study output.  replicate == -1 marks aggregate rows.
struct ExperimentRecord {
    std::string experiment;
    int n = 0;
    int p = 0;
    int k = 0;
    std::string condition;
    long long replicate = 0;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
};

inline bool operator<(const ExperimentRecord& a, const ExperimentRecord& b) {
    auto key = [](const ExperimentRecord& r) {
        return std::tie(r.experiment, r.n, r.p, r.k, r.condition, r.replicate,
                        r.metric);
    };
    return key(a) < key(b);
}

inline void sort_records(std::vector<ExperimentRecord>& records) {
    std::stable_sort(records.begin(), records.end());
}

inline void write_records_csv(const std::string& path,
                              const std::vector<ExperimentRecord>& records) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    out << "experiment,n,p,k,condition,replicate,seed,metric,value\n";
    for (const ExperimentRecord& r : records) {
        if (r.experiment.find(',') != std::string::npos ||
            r.condition.find(',') != std::string::npos ||
            r.metric.find(',') != std::string::npos)
            throw ParseError("labels must not contain commas");
        out << r.experiment << "," << r.n << "," << r.p << "," << r.k << ","
            << r.condition << "," << r.replicate << "," << r.seed << ","
            << r.metric << "," << format_double(r.value) << "\n";
    }
}

inline std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "experiment,n,p,k,condition,replicate,seed,metric,value")
        throw ParseError(path + ": missing or malformed header");

    auto fields_of = [&](const std::string& s) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == ',') {
                fields.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        }
        return fields;
    };

    std::vector<ExperimentRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const std::vector<std::string> f = fields_of(line);
        if (f.size() != 9)
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": expected 9 fields");
        ExperimentRecord r;
        r.experiment = f[0];
        try {
            r.n = std::stoi(f[1]);
            r.p = std::stoi(f[2]);
            r.k = std::stoi(f[3]);
            r.condition = f[4];
            r.replicate = std::stoll(f[5]);
            r.seed = std::stoull(f[6]);
            r.metric = f[7];
            r.value = std::stod(f[8]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": malformed numeric field");
        }
        records.push_back(std::move(r));
    }
    return records;
}

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return Rng(master).substream(index).next_u64();
}

inline Matrix stack_rows(const std::vector<LandmarkConfig>& configs) {
    if (configs.empty())
        throw EmptySample("cannot stack an empty list of configurations");
    Matrix X(static_cast<Eigen::Index>(configs.size()),
             static_cast<Eigen::Index>(configs[0].landmark_count()) *
                 configs[0].dimension());
    for (std::size_t i = 0; i < configs.size(); ++i)
        X.row(static_cast<Eigen::Index>(i)) = vectorize(configs[i]);
    return X;
}

inline Vector gather(const std::vector<double>& values,
                     const std::vector<int>& ids) {
    Vector out(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = values[static_cast<std::size_t>(ids[i])];
    return out;
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return s / static_cast<double>(v.size());
}

inline double sd_of(const Vector& v) {
    if (v.size() < 2)
        return 0.0;
    const double m = v.mean();
    return std::sqrt((v.array() - m).square().sum() /
                     static_cast<double>(v.size() - 1));
}

} // namespace detail

/// Frobenius displacement of each retained specimen between the full-sample
/// alignment and the alignment with one specimen removed.  The two solutions
/// are defined only up to a shared rotation, so the reduced frame is first
/// carried onto the full one through their references.
inline std::vector<double> loo_displacements(
    const std::vector<LandmarkConfig>& configs, std::size_t removed,
    const GpaOptions& opt = {}) {
    if (removed >= configs.size())
        throw InvalidArgument("removed index out of range");
    if (configs.size() < 4)
        throw EmptySample("leave-one-out needs at least 4 specimens");

    AlignmentResult full = gpa(configs, opt);

    std::vector<LandmarkConfig> reduced;
    reduced.reserve(configs.size() - 1);
    for (std::size_t i = 0; i < configs.size(); ++i)
        if (i != removed)
            reduced.push_back(configs[i]);
    AlignmentResult part = gpa(reduced, opt);

    const SimilarityTransform frame =
        optimal_rotation(part.reference, full.reference);

    std::vector<double> out;
    out.reserve(reduced.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (i == removed)
            continue;
        const LandmarkConfig moved = frame.apply(part.aligned[j]);
        out.push_back((moved.coords() - full.aligned[i].coords()).norm());
        ++j;
    }
    return out;
}

/// Mean leave-one-out displacement per replicate across sample sizes, with a
/// percentile bootstrap over the replicate means for each size.
inline std::vector<ExperimentRecord> run_loo_instability(
    const SimConfig& base, const std::vector<int>& sizes, int replicates,
    int boot_reps, std::uint64_t seed, const GpaOptions& opt = {},
    const std::string& condition = "default", int threads = 1) {
    if (sizes.empty())
        throw InvalidArgument("sizes must be nonempty");
    for (int s : sizes)
        if (s < 4)
            throw InvalidArgument("each size must be at least 4");
    if (replicates < 1 || boot_reps < 1)
        throw InvalidArgument("replicates and boot_reps must be positive");

    std::vector<ExperimentRecord> records;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const int n = sizes[si];
        std::vector<double> means(static_cast<std::size_t>(replicates));
        std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));

        parallel_for(static_cast<std::size_t>(replicates), threads,
                     [&](std::size_t r) {
                         const std::uint64_t rep_seed = detail::derive_seed(
                             seed, si * 0x10000000ull + r);
                         SimConfig cfg = base;
                         cfg.n = n;
                         cfg.seed = rep_seed;
                         ShapeSample sample = simulate(cfg);
                         // substream index chosen far above any specimen index
                         Rng pick = Rng(rep_seed).substream(0x4C4F4Full);
                         const std::size_t removed = static_cast<std::size_t>(
                             pick.below(static_cast<std::uint64_t>(n)));
                         const std::vector<double> d =
                             loo_displacements(sample.configs, removed, opt);
                         means[r] = detail::mean_of(d);
                         seeds[r] = rep_seed;
                     });

        for (int r = 0; r < replicates; ++r)
            records.push_back({"loo", n, base.p, base.k, condition, r,
                               seeds[static_cast<std::size_t>(r)],
                               "mean_displacement",
                               means[static_cast<std::size_t>(r)]});
        const BootstrapCi ci =
            bootstrap_ci(means, 0.95, boot_reps,
                         detail::derive_seed(seed, 0xB007000ull + si));
        records.push_back({"loo", n, base.p, base.k, condition, -1, seed,
                           "mean", ci.mean});
        records.push_back({"loo", n, base.p, base.k, condition, -1, seed,
                           "ci_lower", ci.lower});
        records.push_back({"loo", n, base.p, base.k, condition, -1, seed,
                           "ci_upper", ci.upper});
    }
    return records;
}

struct ContaminationOutcome {
    double rmse_contaminated = 0.0;
    double rmse_clean = 0.0;
};

/// One simulate/split/align/fit/evaluate pass under both alignment orders.
/// The same individuals, split, and response are used for both pipelines, so
/// any RMSE difference is attributable to when the superimposition happened.
inline ContaminationOutcome contamination_replicate(const SimConfig& base,
                                                    double train_fraction,
                                                    std::uint64_t rep_seed,
                                                    const GpaOptions& opt = {}) {
    SimConfig cfg = base;
    cfg.seed = rep_seed;
    const ShapeSample sample = simulate(cfg);
    const SplitIndices idx =
        split(cfg.n, train_fraction, detail::derive_seed(rep_seed, 1));

    std::vector<LandmarkConfig> train_raw, test_raw;
    train_raw.reserve(idx.train_ids.size());
    test_raw.reserve(idx.test_ids.size());
    for (int id : idx.train_ids)
        train_raw.push_back(sample.configs[static_cast<std::size_t>(id)]);
    for (int id : idx.test_ids)
        test_raw.push_back(sample.configs[static_cast<std::size_t>(id)]);

    const Vector y_train = detail::gather(sample.size_factors, idx.train_ids);
    const Vector y_test = detail::gather(sample.size_factors, idx.test_ids);

    auto evaluate = [&](const SplitAlignment& a) {
        const FitResult fit = ols_fit(detail::stack_rows(a.train), y_train);
        return rmse(y_test, predict(fit, detail::stack_rows(a.test)));
    };

    ContaminationOutcome out;
    out.rmse_contaminated = evaluate(align_contaminated(sample.configs, idx, opt));
    out.rmse_clean = evaluate(align_clean(train_raw, test_raw, opt));
    return out;
}

namespace detail {

// shared replicate loop for the contamination study and each grid cell
inline void contamination_rows(const std::string& experiment,
                               const SimConfig& cfg,
                               const std::string& condition, int replicates,
                               std::uint64_t seed, const GpaOptions& opt,
                               int threads,
                               std::vector<ExperimentRecord>& records,
                               std::vector<double>& deltas,
                               std::vector<double>& cleans) {
    std::vector<ContaminationOutcome> outcomes(
        static_cast<std::size_t>(replicates));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));
    parallel_for(static_cast<std::size_t>(replicates), threads,
                 [&](std::size_t r) {
                     seeds[r] = derive_seed(seed, r);
                     outcomes[r] = contamination_replicate(cfg, 0.7, seeds[r], opt);
                 });

    deltas.resize(static_cast<std::size_t>(replicates));
    cleans.resize(static_cast<std::size_t>(replicates));
    for (int r = 0; r < replicates; ++r) {
        const std::size_t u = static_cast<std::size_t>(r);
        deltas[u] = outcomes[u].rmse_contaminated - outcomes[u].rmse_clean;
        cleans[u] = outcomes[u].rmse_clean;
        records.push_back({experiment, cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_clean", outcomes[u].rmse_clean});
        records.push_back({experiment, cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_contaminated",
                           outcomes[u].rmse_contaminated});
        records.push_back({experiment, cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "delta_rmse", deltas[u]});
    }
}

} // namespace detail

/// Paired contaminated-versus-clean RMSE study at a fixed configuration.
inline std::vector<ExperimentRecord> run_contamination(
    const SimConfig& cfg, int replicates, std::uint64_t seed,
    const GpaOptions& opt = {}, int boot_reps = 1000,
    const std::string& condition = "default", int threads = 1) {
    if (replicates < 1)
        throw InvalidArgument("replicates must be at least 1");

    std::vector<ExperimentRecord> records;
    std::vector<double> deltas, cleans;
    detail::contamination_rows("contamination", cfg, condition, replicates,
                               seed, opt, threads, records, deltas, cleans);

    const BootstrapCi ci = bootstrap_ci(deltas, 0.95, boot_reps,
                                        detail::derive_seed(seed, 0xC1C1ull));
    records.push_back({"contamination", cfg.n, cfg.p, cfg.k, condition, -1,
                       seed, "delta_rmse_mean", ci.mean});
    records.push_back({"contamination", cfg.n, cfg.p, cfg.k, condition, -1,
                       seed, "delta_rmse_ci_lower", ci.lower});
    records.push_back({"contamination", cfg.n, cfg.p, cfg.k, condition, -1,
                       seed, "delta_rmse_ci_upper", ci.upper});
    records.push_back({"contamination", cfg.n, cfg.p, cfg.k, condition, -1,
                       seed, "rmse_clean_mean", detail::mean_of(cleans)});
    return records;
}

/// Contamination study at every (n, p) cell.  Cells likely to give a
/// rank-deficient least-squares step still run; they are flagged instead.
inline std::vector<ExperimentRecord> run_grid(
    const std::vector<int>& n_values, const std::vector<int>& p_values, int k,
    const SimConfig& base, const std::string& condition, int replicates,
    std::uint64_t seed, const GpaOptions& opt = {}, int threads = 1) {
    if (n_values.empty() || p_values.empty())
        throw InvalidArgument("grid axes must be nonempty");
    if (replicates < 1)
        throw InvalidArgument("replicates must be at least 1");

    const std::size_t cells = n_values.size() * p_values.size();
    std::vector<std::vector<ExperimentRecord>> cell_records(cells);

    parallel_for(cells, threads, [&](std::size_t cell) {
        const int n = n_values[cell / p_values.size()];
        const int p = p_values[cell % p_values.size()];
        SimConfig cfg = base;
        cfg.n = n;
        cfg.p = p;
        cfg.k = k;
        const std::uint64_t cell_seed = detail::derive_seed(seed, cell);

        std::vector<double> deltas, cleans;
        detail::contamination_rows("grid", cfg, condition, replicates,
                                   cell_seed, opt, 1, cell_records[cell],
                                   deltas, cleans);

        cell_records[cell].push_back({"grid", n, p, k, condition, -1, cell_seed,
                                      "rmse_clean_mean",
                                      detail::mean_of(cleans)});
        cell_records[cell].push_back({"grid", n, p, k, condition, -1, cell_seed,
                                      "delta_rmse_mean",
                                      detail::mean_of(deltas)});
        cell_records[cell].push_back(
            {"grid", n, p, k, condition, -1, cell_seed, "rank_deficient",
             static_cast<double>(k) * p >= 0.7 * n ? 1.0 : 0.0});
    });

    std::vector<ExperimentRecord> records;
    for (std::vector<ExperimentRecord>& block : cell_records)
        for (ExperimentRecord& r : block)
            records.push_back(std::move(r));
    return records;
}

/// Linear frontier between the stable and unstable halves of a grid.
struct BoundaryFit {
    double slope = 0.0;
    double intercept = 0.0;
    double threshold = 0.0;
    int cells_used = 0;
};

/// Binarizes per-cell mean RMSE at a within-grid quantile, takes the largest
/// stable p per n column, and fits p = slope * n + intercept through those
/// frontier points. Cells flagged rank-deficient are excluded before
/// thresholding: past the interpolation threshold the minimum-norm fit's
/// test error no longer orders cells by sample adequacy. The default
/// quantile keeps the frontier near the steep error rise ahead of that
/// threshold, where its slope is insensitive to generator settings.
inline BoundaryFit fit_boundary(const std::vector<ExperimentRecord>& records,
                                double threshold_quantile = 0.8) {
    if (!(threshold_quantile > 0.0 && threshold_quantile < 1.0))
        throw InvalidArgument("threshold_quantile must lie in (0, 1)");

    std::map<std::pair<int, int>, double> cells;
    for (const ExperimentRecord& r : records)
        if (r.replicate == -1 && r.metric == "rmse_clean_mean")
            cells[{r.n, r.p}] = r.value;
    for (const ExperimentRecord& r : records)
        if (r.replicate == -1 && r.metric == "rank_deficient" && r.value == 1.0)
            cells.erase({r.n, r.p});

    std::set<int> n_seen;
    for (const auto& [np, value] : cells)
        n_seen.insert(np.first);
    if (n_seen.size() < 3)
        throw InvalidArgument("boundary fit needs at least 3 distinct n values");

    std::vector<double> values;
    values.reserve(cells.size());
    for (const auto& [np, value] : cells)
        values.push_back(value);
    std::sort(values.begin(), values.end());
    const double threshold = detail::quantile_sorted(values, threshold_quantile);

    std::map<int, int> frontier; // n -> largest stable p
    std::size_t stable = 0;
    for (const auto& [np, value] : cells) {
        if (value <= threshold) {
            ++stable;
            auto [it, inserted] = frontier.try_emplace(np.first, np.second);
            if (!inserted)
                it->second = std::max(it->second, np.second);
        }
    }
    if (stable == 0 || stable == cells.size())
        throw BoundaryUndefined("threshold leaves no cells on one side");
    if (frontier.size() < 2)
        throw BoundaryUndefined("fewer than two frontier points");

    double mean_n = 0.0, mean_p = 0.0;
    for (const auto& [n, p] : frontier) {
        mean_n += n;
        mean_p += p;
    }
    mean_n /= static_cast<double>(frontier.size());
    mean_p /= static_cast<double>(frontier.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [n, p] : frontier) {
        sxx += (n - mean_n) * (n - mean_n);
        sxy += (n - mean_n) * (p - mean_p);
    }

    BoundaryFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_p - fit.slope * mean_n;
    fit.threshold = threshold;
    fit.cells_used = static_cast<int>(frontier.size());
    return fit;
}

/// Six one-knob variations of the default generator for the robustness sweep.
inline std::vector<std::pair<std::string, SimConfig>> sensitivity_presets(
    int k) {
    const SimConfig base = default_config(4, 3, k);
    std::vector<std::pair<std::string, SimConfig>> out;
    SimConfig cfg = base;
    cfg.shear_min = -0.1;
    cfg.shear_max = 0.1;
    out.emplace_back("shear_low", cfg);
    cfg = base;
    cfg.shear_min = -1.4;
    cfg.shear_max = 1.4;
    out.emplace_back("shear_high", cfg);
    cfg = base;
    cfg.rho = 2.0;
    out.emplace_back("rho_low", cfg);
    cfg = base;
    cfg.rho = 5.0;
    out.emplace_back("rho_high", cfg);
    cfg = base;
    cfg.sigma = 0.05;
    out.emplace_back("sigma_low", cfg);
    cfg = base;
    cfg.sigma = 1.0;
    out.emplace_back("sigma_high", cfg);
    return out;
}

/// Grid plus boundary fit for each named configuration preset.
inline std::vector<ExperimentRecord> run_sensitivity(
    const std::vector<std::pair<std::string, SimConfig>>& presets,
    const std::vector<int>& n_values, const std::vector<int>& p_values, int k,
    int replicates, double threshold_quantile, std::uint64_t seed,
    const GpaOptions& opt = {}, int threads = 1) {
    if (presets.empty())
        throw InvalidArgument("presets must be nonempty");

    std::vector<ExperimentRecord> records;
    for (std::size_t i = 0; i < presets.size(); ++i) {
        const auto& [name, cfg] = presets[i];
        const std::uint64_t preset_seed = detail::derive_seed(seed, i);
        std::vector<ExperimentRecord> grid =
            run_grid(n_values, p_values, k, cfg, name, replicates, preset_seed,
                     opt, threads);
        const BoundaryFit fit = fit_boundary(grid, threshold_quantile);
        for (ExperimentRecord& r : grid) {
            r.experiment = "sensitivity";
            records.push_back(std::move(r));
        }
        records.push_back({"sensitivity", 0, 0, k, name, -1, preset_seed,
                           "boundary_slope", fit.slope});
        records.push_back({"sensitivity", 0, 0, k, name, -1, preset_seed,
                           "boundary_intercept", fit.intercept});
        records.push_back({"sensitivity", 0, 0, k, name, -1, preset_seed,
                           "boundary_threshold", fit.threshold});
        records.push_back({"sensitivity", 0, 0, k, name, -1, preset_seed,
                           "boundary_cells",
                           static_cast<double>(fit.cells_used)});
    }
    return records;
}

/// Paired size-regression comparison of the flat and structured learners on
/// leakage-free aligned data.  Both models see identical splits, identical
/// training settings, and the same seed, so each replicate is a clean pair.
/// Generator settings for the paired linear-vs-conv comparison: low landmark
/// noise and a near-linear size link keep the regression well inside the
/// learnable regime for the fixed epoch budget.
inline SimConfig spatial_default_config() {
    SimConfig cfg = default_config(210, 16, 2);
    cfg.rho = 2.0;
    cfg.sigma = 0.05;
    return cfg;
}

inline std::vector<ExperimentRecord> run_spatial(
    const SimConfig& cfg, int replicates, const TrainSpec& train_spec,
    const ConvSpec& conv_spec, std::uint64_t seed, const GpaOptions& opt = {},
    const std::string& condition = "default", int boot_reps = 1000,
    int threads = 1) {
    if (replicates < 1)
        throw InvalidArgument("replicates must be at least 1");

    std::vector<double> lin(static_cast<std::size_t>(replicates));
    std::vector<double> conv(static_cast<std::size_t>(replicates));
    std::vector<double> lin_norm(static_cast<std::size_t>(replicates));
    std::vector<double> conv_norm(static_cast<std::size_t>(replicates));
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(replicates));

    parallel_for(static_cast<std::size_t>(replicates), threads,
                 [&](std::size_t r) {
                     const std::uint64_t rep_seed = detail::derive_seed(seed, r);
                     SimConfig c = cfg;
                     c.seed = rep_seed;
                     const ShapeSample sample = simulate(c);
                     const SplitIndices idx =
                         split(c.n, 0.7, detail::derive_seed(rep_seed, 1));

                     std::vector<LandmarkConfig> train_raw, test_raw;
                     for (int id : idx.train_ids)
                         train_raw.push_back(
                             sample.configs[static_cast<std::size_t>(id)]);
                     for (int id : idx.test_ids)
                         test_raw.push_back(
                             sample.configs[static_cast<std::size_t>(id)]);
                     const SplitAlignment aligned =
                         align_clean(train_raw, test_raw, opt);

                     const Matrix x_train = detail::stack_rows(aligned.train);
                     const Matrix x_test = detail::stack_rows(aligned.test);
                     const Vector y_train =
                         detail::gather(sample.size_factors, idx.train_ids);
                     const Vector y_test =
                         detail::gather(sample.size_factors, idx.test_ids);

                     TrainSpec ts = train_spec;
                     ts.seed = detail::derive_seed(rep_seed, 2);

                     const FitResult f_lin = train_linear(x_train, y_train, ts);
                     const FitResult f_conv =
                         train_conv(x_train, y_train, c.p, c.k, ts, conv_spec);

                     lin[r] = rmse(y_test, predict(f_lin, x_test));
                     conv[r] = rmse(y_test, predict(f_conv, x_test));
                     const double spread = detail::sd_of(y_test);
                     lin_norm[r] = spread > 0.0 ? lin[r] / spread : lin[r];
                     conv_norm[r] = spread > 0.0 ? conv[r] / spread : conv[r];
                     seeds[r] = rep_seed;
                 });

    std::vector<ExperimentRecord> records;
    int conv_wins = 0;
    for (int r = 0; r < replicates; ++r) {
        const std::size_t u = static_cast<std::size_t>(r);
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_linear", lin[u]});
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_conv", conv[u]});
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_linear_norm", lin_norm[u]});
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, r,
                           seeds[u], "rmse_conv_norm", conv_norm[u]});
        if (conv[u] < lin[u])
            ++conv_wins;
    }

    auto summarize = [&](const std::string& name,
                         const std::vector<double>& values,
                         std::uint64_t salt) {
        const BootstrapCi ci = bootstrap_ci(values, 0.95, boot_reps,
                                            detail::derive_seed(seed, salt));
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, -1, seed,
                           name + "_mean", ci.mean});
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, -1, seed,
                           name + "_ci_lower", ci.lower});
        records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, -1, seed,
                           name + "_ci_upper", ci.upper});
    };
    summarize("rmse_linear", lin, 0xD1ull);
    summarize("rmse_conv", conv, 0xD2ull);
    summarize("rmse_linear_norm", lin_norm, 0xD3ull);
    summarize("rmse_conv_norm", conv_norm, 0xD4ull);
    records.push_back({"spatial", cfg.n, cfg.p, cfg.k, condition, -1, seed,
                       "conv_win_fraction",
                       static_cast<double>(conv_wins) /
                           static_cast<double>(replicates)});
    return records;
}

/// Isotropic-null PCA sweep: cumulative-variance slopes and spectrum ranks
/// across (p, k, alpha) with sample size tied to the shape-space dimension.
inline std::vector<ExperimentRecord> run_pca_null(
    const std::vector<int>& p_values, const std::vector<int>& k_values,
    int n_multiplier, const std::vector<double>& alpha_values,
    std::uint64_t seed) {
    if (p_values.empty() || k_values.empty() || alpha_values.empty())
        throw InvalidArgument("pca null sweep needs nonempty grids");
    if (n_multiplier < 1)
        throw InvalidArgument("n_multiplier must be at least 1");

    std::vector<ExperimentRecord> records;
    std::uint64_t combo = 0;
    for (int k : k_values) {
        for (int p : p_values) {
            const int q = tangent_dimension(p, k);
            if (q < 1)
                throw InvalidSpec("configuration has no shape variation");
            const int n = n_multiplier * q;
            for (double alpha : alpha_values) {
                const std::uint64_t combo_seed = detail::derive_seed(seed, combo++);
                const IsotropyCheck chk =
                    isotropy_null_check(p, k, n, alpha, combo_seed);
                char label[32];
                std::snprintf(label, sizeof label, "alpha=%.2f", alpha);
                const std::string cond(label);
                records.push_back({"pca_null", n, p, k, cond, 0, combo_seed,
                                   "expected_slope", chk.expected_slope});
                records.push_back({"pca_null", n, p, k, cond, 0, combo_seed,
                                   "empirical_slope", chk.empirical_slope});
                records.push_back({"pca_null", n, p, k, cond, 0, combo_seed,
                                   "nonzero_eigenvalues",
                                   static_cast<double>(chk.nonzero_eigenvalues)});
                records.push_back({"pca_null", n, p, k, cond, 0, combo_seed,
                                   "tangent_dimension",
                                   static_cast<double>(chk.tangent_dim)});
                records.push_back({"pca_null", n, p, k, cond, 0, combo_seed,
                                   "components_used",
                                   static_cast<double>(chk.components_used)});
            }
        }
    }
    return records;
}

} // namespace procml
