#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "procml/experiments.hpp"

using namespace procml;

namespace {

std::vector<ExperimentRecord> grid_cells(const std::vector<int>& ns,
                                         const std::vector<int>& ps,
                                         double (*value)(int, int)) {
    std::vector<ExperimentRecord> records;
    for (int n : ns)
        for (int p : ps)
            records.push_back(
                {"grid", n, p, 2, "planted", -1, 0, "rmse_clean_mean", value(n, p)});
    return records;
}

std::vector<double> metric_values(const std::vector<ExperimentRecord>& records,
                                  const std::string& metric,
                                  bool summary_only = false) {
    std::vector<double> out;
    for (const ExperimentRecord& r : records)
        if (r.metric == metric && (!summary_only || r.replicate == -1))
            out.push_back(r.value);
    return out;
}

} // namespace

TEST_CASE("record csv round-trips exactly", "[experiments]") {
    std::vector<ExperimentRecord> records{
        {"loo", 10, 5, 2, "default", 0, 42, "mean_displacement", 0.1234567890123},
        {"loo", 10, 5, 2, "default", -1, 42, "mean", 1e-17},
        {"grid", 200, 64, 3, "sigma_high", 19, 7, "delta_rmse", -0.5},
    };
    write_records_csv("records_roundtrip.csv", records);
    const std::vector<ExperimentRecord> back =
        read_records_csv("records_roundtrip.csv");
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        REQUIRE(back[i].experiment == records[i].experiment);
        REQUIRE(back[i].n == records[i].n);
        REQUIRE(back[i].p == records[i].p);
        REQUIRE(back[i].k == records[i].k);
        REQUIRE(back[i].condition == records[i].condition);
        REQUIRE(back[i].replicate == records[i].replicate);
        REQUIRE(back[i].seed == records[i].seed);
        REQUIRE(back[i].metric == records[i].metric);
        REQUIRE(back[i].value == records[i].value);
    }
    std::remove("records_roundtrip.csv");

    std::vector<ExperimentRecord> bad{
        {"a,b", 1, 1, 2, "c", 0, 0, "m", 0.0}};
    REQUIRE_THROWS_AS(write_records_csv("records_bad.csv", bad), ParseError);
    std::remove("records_bad.csv");

    std::ofstream out("records_header.csv");
    out << "wrong,header\n";
    out.close();
    REQUIRE_THROWS_AS(read_records_csv("records_header.csv"), ParseError);
    std::remove("records_header.csv");
}

TEST_CASE("record ordering sorts by the full key", "[experiments]") {
    std::vector<ExperimentRecord> records{
        {"b", 1, 1, 2, "x", 0, 0, "m", 1.0},
        {"a", 2, 1, 2, "x", 0, 0, "m", 2.0},
        {"a", 1, 1, 2, "x", 1, 0, "m", 3.0},
        {"a", 1, 1, 2, "x", -1, 0, "m", 4.0},
    };
    sort_records(records);
    REQUIRE(records[0].value == 4.0);
    REQUIRE(records[1].value == 3.0);
    REQUIRE(records[2].value == 2.0);
    REQUIRE(records[3].value == 1.0);
}

TEST_CASE("identical specimens are immune to leave-one-out", "[experiments]") {
    const LandmarkConfig base = base_shape(5, 2);
    std::vector<LandmarkConfig> configs(6, base);
    const std::vector<double> d = loo_displacements(configs, 2);
    REQUIRE(d.size() == 5);
    for (double x : d)
        REQUIRE(x <= 1e-10);
}

TEST_CASE("leave-one-out displacements are finite and nonnegative", "[experiments]") {
    SimConfig cfg = default_config(12, 6, 2);
    cfg.seed = 7;
    const ShapeSample sample = simulate(cfg);
    const std::vector<double> d = loo_displacements(sample.configs, 0);
    REQUIRE(d.size() == 11);
    for (double x : d) {
        REQUIRE(std::isfinite(x));
        REQUIRE(x >= 0.0);
    }
    REQUIRE_THROWS_AS(loo_displacements(sample.configs, 12), InvalidArgument);
}

TEST_CASE("instability study emits per-size rows plus a bootstrap summary",
          "[experiments]") {
    const SimConfig base = default_config(0, 6, 2);
    const std::vector<int> sizes{10, 20};
    const std::vector<ExperimentRecord> records =
        run_loo_instability(base, sizes, 5, 50, 99);
    REQUIRE(records.size() == 2 * (5 + 3));

    for (int n : sizes) {
        double mean = 0.0, lo = 0.0, hi = 0.0, acc = 0.0;
        for (const ExperimentRecord& r : records) {
            if (r.n != n)
                continue;
            if (r.metric == "mean_displacement")
                acc += r.value;
            if (r.metric == "mean")
                mean = r.value;
            if (r.metric == "ci_lower")
                lo = r.value;
            if (r.metric == "ci_upper")
                hi = r.value;
        }
        REQUIRE(mean == Catch::Approx(acc / 5.0).margin(1e-15));
        REQUIRE(lo <= mean);
        REQUIRE(mean <= hi);
    }

    const std::vector<ExperimentRecord> again =
        run_loo_instability(base, sizes, 5, 50, 99);
    REQUIRE(again.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        REQUIRE(again[i].value == records[i].value);
}

TEST_CASE("duplicated test specimens give identical pipelines", "[experiments]") {
    SimConfig cfg = default_config(8, 6, 2);
    cfg.seed = 21;
    const ShapeSample sample = simulate(cfg);

    std::vector<LandmarkConfig> all = sample.configs;
    all.insert(all.end(), sample.configs.begin(), sample.configs.end());
    SplitIndices idx;
    for (int i = 0; i < 8; ++i)
        idx.train_ids.push_back(i);
    for (int i = 8; i < 16; ++i)
        idx.test_ids.push_back(i);

    Vector y(8);
    for (int i = 0; i < 8; ++i)
        y(i) = sample.size_factors[static_cast<std::size_t>(i)];

    auto evaluate = [&](const SplitAlignment& a) {
        const FitResult fit = ols_fit(detail::stack_rows(a.train), y);
        return rmse(y, predict(fit, detail::stack_rows(a.test)));
    };
    const double contaminated = evaluate(align_contaminated(all, idx));
    const double clean = evaluate(align_clean(sample.configs, sample.configs));
    REQUIRE(std::abs(contaminated - clean) < 1e-6);
}

TEST_CASE("contamination replicates are reproducible bit for bit", "[experiments]") {
    const SimConfig cfg = default_config(40, 6, 2);
    const ContaminationOutcome a = contamination_replicate(cfg, 0.7, 555);
    const ContaminationOutcome b = contamination_replicate(cfg, 0.7, 555);
    REQUIRE(a.rmse_clean == b.rmse_clean);
    REQUIRE(a.rmse_contaminated == b.rmse_contaminated);
    REQUIRE(std::isfinite(a.rmse_clean));
    REQUIRE(a.rmse_clean >= 0.0);
}

TEST_CASE("contamination study summarizes the paired deltas", "[experiments]") {
    const SimConfig cfg = default_config(40, 6, 2);
    const std::vector<ExperimentRecord> records =
        run_contamination(cfg, 8, 31, {}, 100);
    REQUIRE(records.size() == 8 * 3 + 4);

    const std::vector<double> deltas = metric_values(records, "delta_rmse");
    REQUIRE(deltas.size() == 8);
    double acc = 0.0;
    for (double d : deltas)
        acc += d;
    const std::vector<double> mean =
        metric_values(records, "delta_rmse_mean", true);
    REQUIRE(mean.size() == 1);
    REQUIRE(mean[0] == Catch::Approx(acc / 8.0).margin(1e-15));
    REQUIRE(metric_values(records, "delta_rmse_ci_lower", true)[0] <= mean[0]);
    REQUIRE(metric_values(records, "delta_rmse_ci_upper", true)[0] >= mean[0]);

    const std::vector<ExperimentRecord> again =
        run_contamination(cfg, 8, 31, {}, 100);
    for (std::size_t i = 0; i < records.size(); ++i)
        REQUIRE(again[i].value == records[i].value);
}

TEST_CASE("a one-cell grid reduces to the contamination study", "[experiments]") {
    const SimConfig base = default_config(0, 0, 2);
    const std::vector<ExperimentRecord> grid =
        run_grid({40}, {6}, 2, base, "default", 5, 77);

    SimConfig cfg = base;
    cfg.n = 40;
    cfg.p = 6;
    const std::vector<ExperimentRecord> direct =
        run_contamination(cfg, 5, detail::derive_seed(77, 0));

    const std::vector<double> a = metric_values(grid, "delta_rmse");
    const std::vector<double> b = metric_values(direct, "delta_rmse");
    REQUIRE(a.size() == 5);
    REQUIRE(a == b);
    REQUIRE(metric_values(grid, "rmse_clean_mean", true) ==
            metric_values(direct, "rmse_clean_mean", true));
}

TEST_CASE("grid rows scale with cells and replicates, with rank flags",
          "[experiments]") {
    const SimConfig base = default_config(0, 0, 2);
    const std::vector<int> ns{20, 200};
    const std::vector<int> ps{4, 16};
    const std::vector<ExperimentRecord> records =
        run_grid(ns, ps, 2, base, "default", 2, 13);
    // 4 cells x 2 replicates x 3 metrics + 4 cells x 3 summaries
    REQUIRE(records.size() == 4 * 2 * 3 + 4 * 3);

    auto flag_of = [&](int n, int p) {
        for (const ExperimentRecord& r : records)
            if (r.metric == "rank_deficient" && r.n == n && r.p == p)
                return r.value;
        return -1.0;
    };
    REQUIRE(flag_of(20, 16) == 1.0);  // 2*16 >= 0.7*20
    REQUIRE(flag_of(20, 4) == 0.0);
    REQUIRE(flag_of(200, 4) == 0.0);
    REQUIRE(flag_of(200, 16) == 0.0);
}

TEST_CASE("clean rmse decreases with sample size at fixed landmarks",
          "[experiments]") {
    const SimConfig base = default_config(0, 0, 2);
    const std::vector<int> ns{20, 60, 120, 200};
    const std::vector<ExperimentRecord> records =
        run_grid(ns, {6}, 2, base, "default", 10, 5);
    std::vector<double> means;
    for (int n : ns)
        for (const ExperimentRecord& r : records)
            if (r.metric == "rmse_clean_mean" && r.n == n)
                means.push_back(r.value);
    REQUIRE(means.size() == 4);
    int violations = 0;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] > means[i - 1])
            ++violations;
    REQUIRE(violations <= 1);
}

TEST_CASE("a planted linear frontier is recovered", "[experiments]") {
    std::vector<int> ns, ps;
    for (int n = 20; n <= 200; n += 20)
        ns.push_back(n);
    for (int p = 4; p <= 64; p += 4)
        ps.push_back(p);
    const std::vector<ExperimentRecord> records = grid_cells(
        ns, ps, [](int n, int p) {
            return p <= n / 3.0 + 3.0 ? 0.1 : 1.0;
        });
    const BoundaryFit fit = fit_boundary(records, 0.5);
    REQUIRE(fit.slope == Catch::Approx(1.0 / 3.0).margin(0.05));
    REQUIRE(fit.intercept == Catch::Approx(3.0).margin(4.0));
    REQUIRE(fit.cells_used >= 5);
}

TEST_CASE("rank-flagged cells are excluded from the boundary fit",
          "[experiments]") {
    const std::vector<int> ns{30, 60, 90};
    const std::vector<int> ps{4, 8, 12};
    const auto value = [](int n, int p) { return p <= n / 6.0 ? 0.1 : 1.0; };

    // p = 12 at n = 30 interpolates (2*12 >= 0.7*30): give it a deceptively
    // low error and flag it.
    std::vector<ExperimentRecord> flagged = grid_cells(ns, ps, value);
    for (ExperimentRecord& r : flagged)
        if (r.n == 30 && r.p == 12)
            r.value = 0.05;
    flagged.push_back(
        {"grid", 30, 12, 2, "d", -1, 0, "rank_deficient", 1.0});

    std::vector<ExperimentRecord> pruned;
    for (const ExperimentRecord& r : flagged)
        if (!(r.n == 30 && r.p == 12))
            pruned.push_back(r);

    const BoundaryFit with_flag = fit_boundary(flagged, 0.5);
    const BoundaryFit without_cell = fit_boundary(pruned, 0.5);
    REQUIRE(with_flag.slope == without_cell.slope);
    REQUIRE(with_flag.intercept == without_cell.intercept);
    REQUIRE(with_flag.threshold == without_cell.threshold);
    REQUIRE(with_flag.cells_used == without_cell.cells_used);

    // without the flag row the low-error interpolating cell joins the
    // frontier and tilts the fit
    std::vector<ExperimentRecord> unflagged = flagged;
    unflagged.pop_back();
    const BoundaryFit naive = fit_boundary(unflagged, 0.5);
    REQUIRE(naive.slope != with_flag.slope);
}

TEST_CASE("degenerate grids leave the boundary undefined", "[experiments]") {
    std::vector<int> ns{20, 40, 60};
    std::vector<int> ps{4, 8};
    const std::vector<ExperimentRecord> flat =
        grid_cells(ns, ps, [](int, int) { return 1.0; });
    REQUIRE_THROWS_AS(fit_boundary(flat, 0.5), BoundaryUndefined);

    // stable cells confined to one column leave a single frontier point
    const std::vector<ExperimentRecord> single = grid_cells(
        ns, ps, [](int n, int) { return n == 20 ? 0.1 : 1.0; });
    REQUIRE_THROWS_AS(fit_boundary(single, 0.25), BoundaryUndefined);

    const std::vector<ExperimentRecord> narrow =
        grid_cells({20, 40}, ps, [](int n, int) { return n == 20 ? 0.1 : 1.0; });
    REQUIRE_THROWS_AS(fit_boundary(narrow, 0.5), InvalidArgument);
    REQUIRE_THROWS_AS(fit_boundary(flat, 0.0), InvalidArgument);
}

TEST_CASE("a single preset reduces to grid plus boundary", "[experiments]") {
    const std::vector<int> ns{20, 40, 60};
    const std::vector<int> ps{4, 8};
    const SimConfig base = default_config(0, 0, 2);
    const std::vector<std::pair<std::string, SimConfig>> presets{
        {"solo", base}};

    const std::vector<ExperimentRecord> sens =
        run_sensitivity(presets, ns, ps, 2, 2, 0.5, 404);
    const std::vector<ExperimentRecord> grid =
        run_grid(ns, ps, 2, base, "solo", 2, detail::derive_seed(404, 0));
    const BoundaryFit fit = fit_boundary(grid, 0.5);

    REQUIRE(sens.size() == grid.size() + 4);
    const std::vector<double> slope =
        metric_values(sens, "boundary_slope", true);
    REQUIRE(slope.size() == 1);
    REQUIRE(slope[0] == fit.slope);
    REQUIRE(metric_values(sens, "boundary_intercept", true)[0] == fit.intercept);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(sens[i].experiment == "sensitivity");
        REQUIRE(sens[i].value == grid[i].value);
    }
}

TEST_CASE("record counts scale linearly with preset count", "[experiments]") {
    const std::vector<int> ns{20, 40, 60};
    const std::vector<int> ps{4, 8};
    const SimConfig base = default_config(0, 0, 2);
    const std::vector<std::pair<std::string, SimConfig>> one{{"a", base}};
    const std::vector<std::pair<std::string, SimConfig>> two{{"a", base},
                                                             {"b", base}};
    const std::size_t r1 = run_sensitivity(one, ns, ps, 2, 2, 0.5, 11).size();
    const std::size_t r2 = run_sensitivity(two, ns, ps, 2, 2, 0.5, 11).size();
    REQUIRE(r2 == 2 * r1);
}

TEST_CASE("spatial study pairs the two learners deterministically",
          "[experiments]") {
    SimConfig cfg = default_config(60, 6, 2);
    TrainSpec ts;
    ts.epochs = 10;
    const std::vector<ExperimentRecord> records =
        run_spatial(cfg, 4, ts, ConvSpec{}, 808);
    REQUIRE(records.size() == 4 * 4 + 13);

    const std::vector<double> wins =
        metric_values(records, "conv_win_fraction", true);
    REQUIRE(wins.size() == 1);
    REQUIRE(wins[0] >= 0.0);
    REQUIRE(wins[0] <= 1.0);

    const std::vector<double> lin = metric_values(records, "rmse_linear");
    const std::vector<double> conv = metric_values(records, "rmse_conv");
    REQUIRE(lin.size() == 4);
    REQUIRE(conv.size() == 4);
    for (double v : lin)
        REQUIRE(std::isfinite(v));

    const std::vector<ExperimentRecord> again =
        run_spatial(cfg, 4, ts, ConvSpec{}, 808);
    for (std::size_t i = 0; i < records.size(); ++i)
        REQUIRE(again[i].value == records[i].value);
}

TEST_CASE("isotropic null sweep reports the dimension-dependent slopes",
          "[experiments]") {
    const std::vector<ExperimentRecord> records =
        run_pca_null({5}, {2, 3}, 30, {1.0}, 66);
    REQUIRE(records.size() == 2 * 5);

    for (const ExperimentRecord& r : records) {
        if (r.metric != "expected_slope")
            continue;
        if (r.k == 2)
            REQUIRE(r.value == Catch::Approx(1.0 / 3.0));
        if (r.k == 3)
            REQUIRE(r.value == Catch::Approx(1.0 / 4.0));
    }
    for (const ExperimentRecord& r : records) {
        if (r.metric == "nonzero_eigenvalues") {
            double q = -1.0;
            for (const ExperimentRecord& s : records)
                if (s.k == r.k && s.metric == "tangent_dimension")
                    q = s.value;
            REQUIRE(r.value == q);
        }
    }
    REQUIRE_THROWS_AS(run_pca_null({}, {2}, 10, {0.5}, 1), InvalidArgument);
}
