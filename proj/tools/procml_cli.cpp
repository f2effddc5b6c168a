#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "procml/experiments.hpp"
#include "procml/io.hpp"
#include "procml/svg.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int parse_int(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not an integer: " + text);
    }
    if (used != text.size())
        throw UsageError("config key '" + key + "': not an integer: " + text);
    return value;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
        value = std::stoull(text, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not a seed: " + text);
    }
    if (used != text.size())
        throw UsageError("config key '" + key + "': not a seed: " + text);
    return value;
}

double parse_dbl(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "': not a number: " + text);
    }
    if (used != text.size())
        throw UsageError("config key '" + key + "': not a number: " + text);
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1")
        return true;
    if (text == "false" || text == "0")
        return false;
    throw UsageError("config key '" + key + "': not a boolean: " + text);
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& text) {
    std::vector<int> values;
    for (const std::string& part : split_commas(text))
        values.push_back(parse_int(key, part));
    return values;
}

std::vector<double> parse_dbl_list(const std::string& key,
                                   const std::string& text) {
    std::vector<double> values;
    for (const std::string& part : split_commas(text))
        values.push_back(parse_dbl(key, part));
    return values;
}

/// One CLI option mirrored into the config-file and manifest vocabulary.
struct Binding {
    std::string key;
    CLI::Option* opt;
    std::function<void(const std::string&)> assign;
    std::function<std::string()> serialize;
};

struct Subcommand {
    CLI::App* app = nullptr;
    std::vector<Binding> bindings;
    std::function<void()> run;

    void bind_int(const std::string& flag, const std::string& key, int& var,
                  const std::string& help) {
        CLI::Option* opt =
            app->add_option(flag, var, help)->capture_default_str();
        bindings.push_back({key, opt,
                            [&var, key](const std::string& v) {
                                var = parse_int(key, v);
                            },
                            [&var] { return std::to_string(var); }});
    }

    void bind_u64(const std::string& flag, const std::string& key,
                  std::uint64_t& var, const std::string& help) {
        CLI::Option* opt =
            app->add_option(flag, var, help)->capture_default_str();
        bindings.push_back({key, opt,
                            [&var, key](const std::string& v) {
                                var = parse_u64(key, v);
                            },
                            [&var] { return std::to_string(var); }});
    }

    void bind_dbl(const std::string& flag, const std::string& key, double& var,
                  const std::string& help) {
        CLI::Option* opt =
            app->add_option(flag, var, help)->capture_default_str();
        bindings.push_back({key, opt,
                            [&var, key](const std::string& v) {
                                var = parse_dbl(key, v);
                            },
                            [&var] { return procml::format_double(var); }});
    }

    void bind_str(const std::string& flag, const std::string& key,
                  std::string& var, const std::string& help) {
        CLI::Option* opt =
            app->add_option(flag, var, help)->capture_default_str();
        bindings.push_back({key, opt,
                            [&var](const std::string& v) { var = v; },
                            [&var] { return var; }});
    }

    /// Off-flag for a default-true boolean (e.g. --no-scale for scale).
    void bind_off_flag(const std::string& flag, const std::string& key,
                       bool& var, const std::string& help) {
        CLI::Option* opt = app->add_flag_callback(
            flag, [&var] { var = false; }, help);
        bindings.push_back({key, opt,
                            [&var, key](const std::string& v) {
                                var = parse_bool(key, v);
                            },
                            [&var] { return var ? "true" : "false"; }});
    }

    void bind_on_flag(const std::string& flag, const std::string& key,
                      bool& var, const std::string& help) {
        CLI::Option* opt = app->add_flag_callback(
            flag, [&var] { var = true; }, help);
        bindings.push_back({key, opt,
                            [&var, key](const std::string& v) {
                                var = parse_bool(key, v);
                            },
                            [&var] { return var ? "true" : "false"; }});
    }
};

std::string default_out_dir() {
    const char* env = std::getenv("PROCML_OUT");
    return env != nullptr && env[0] != '\0' ? env : "results";
}

/// Config-file values fill in every option the command line left untouched.
void apply_config(Subcommand& sub, const std::string& config_path,
                  const std::string& name) {
    if (config_path.empty())
        return;
    procml::ConfigData data;
    try {
        data = procml::read_config_file(config_path);
    } catch (const procml::ParseError& e) {
        throw UsageError(e.what());
    }

    for (const auto& [key, value] : data.global) {
        if (key == "version")
            continue;
        if (key == "subcommand") {
            if (value != name)
                throw UsageError("config is for subcommand '" + value +
                                 "', not '" + name + "'");
            continue;
        }
        throw UsageError("unknown config key '" + key + "'");
    }
    for (const auto& [section, entries] : data.sections) {
        if (section != name)
            throw UsageError("unknown config section '" + section + "'");
        for (const auto& [key, value] : entries) {
            Binding* found = nullptr;
            for (Binding& b : sub.bindings)
                if (b.key == key) {
                    found = &b;
                    break;
                }
            if (found == nullptr)
                throw UsageError("unknown config key '" + key + "'");
            if (found->opt->count() == 0)
                found->assign(value);
        }
    }
}

void write_manifest(const Subcommand& sub, const std::string& name,
                    const std::string& out_dir) {
    procml::ConfigData data;
    data.global.emplace_back("version", kVersion);
    data.global.emplace_back("subcommand", name);
    data.sections.emplace_back(name, procml::KeyValues{});
    for (const Binding& b : sub.bindings)
        data.sections.back().second.emplace_back(b.key, b.serialize());
    procml::write_config_file(out_dir + "/manifest.cfg", data);
}

void write_sorted_records(std::vector<procml::ExperimentRecord> records,
                          const std::string& path) {
    procml::sort_records(records);
    procml::write_records_csv(path, records);
}

std::vector<procml::ExperimentRecord> filter_metrics(
    const std::vector<procml::ExperimentRecord>& records,
    const std::set<std::string>& metrics) {
    std::vector<procml::ExperimentRecord> out;
    for (const procml::ExperimentRecord& r : records)
        if (metrics.count(r.metric) > 0)
            out.push_back(r);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Procrustes shape analysis and train/test leakage toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // shared state, one block per subcommand
    struct Common {
        std::string out = default_out_dir();
        std::string config;
        std::uint64_t seed = 1;
        int threads = 1;
    };

    std::map<std::string, Subcommand> subs;
    const auto make_sub = [&](const std::string& name, const std::string& desc,
                              Common& c) -> Subcommand& {
        Subcommand& sub = subs[name];
        sub.app = app.add_subcommand(name, desc);
        sub.app->add_option("--config", c.config,
                            "config file; flags override its values");
        sub.bind_str("--out", "out", c.out,
                     "output directory (default from PROCML_OUT if set)");
        sub.bind_u64("--seed", "seed", c.seed, "master seed");
        sub.bind_int("--threads", "threads", c.threads, "worker thread count");
        return sub;
    };

    const auto bind_sim = [](Subcommand& sub, procml::SimConfig& cfg,
                             bool with_np) {
        if (with_np) {
            sub.bind_int("--n", "n", cfg.n, "specimen count");
            sub.bind_int("--p", "p", cfg.p, "landmark count");
        }
        sub.bind_int("--k", "k", cfg.k, "spatial dimension (2 or 3)");
        sub.bind_dbl("--sigma", "sigma", cfg.sigma,
                     "per-coordinate landmark noise SD");
        sub.bind_dbl("--shear-min", "shear_min", cfg.shear_min,
                     "lower shear strength");
        sub.bind_dbl("--shear-max", "shear_max", cfg.shear_max,
                     "upper shear strength");
        sub.bind_dbl("--shear-noise-sd", "shear_noise_sd", cfg.shear_noise_sd,
                     "per-specimen shear jitter SD");
        sub.bind_dbl("--rho", "rho", cfg.rho, "size exponent");
        sub.bind_dbl("--size-noise-sd", "size_noise_sd", cfg.size_noise_sd,
                     "size factor noise SD");
        sub.bind_dbl("--z-min", "z_min", cfg.z_min, "lower latent size");
        sub.bind_dbl("--z-max", "z_max", cfg.z_max, "upper latent size");
    };

    namespace fs = std::filesystem;
    using namespace procml;

    // ---- simulate ----
    static Common sim_c;
    static SimConfig sim_cfg = default_config(100, 16, 2);
    {
        Subcommand& sub = make_sub(
            "simulate", "generate a synthetic landmark sample", sim_c);
        bind_sim(sub, sim_cfg, true);
        sub.run = [&] {
            sim_cfg.seed = sim_c.seed;
            const ShapeSample sample = simulate(sim_cfg);
            write_landmark_file(sim_c.out + "/specimens.txt", sample.configs);
            std::ofstream truth(sim_c.out + "/truth.csv");
            if (!truth)
                throw ParseError("cannot open for writing: " + sim_c.out +
                                 "/truth.csv");
            truth << "id,size_factor,shear,z\n";
            for (std::size_t i = 0; i < sample.configs.size(); ++i)
                truth << i << "," << format_double(sample.size_factors[i])
                      << "," << format_double(sample.shear_params[i]) << ","
                      << format_double(sample.z_values[i]) << "\n";
        };
    }

    // ---- gpa ----
    static Common gpa_c;
    static std::string gpa_input;
    static GpaOptions gpa_opt;
    {
        Subcommand& sub = make_sub(
            "gpa", "superimpose one landmark file", gpa_c);
        sub.bind_str("--input", "input", gpa_input, "landmark file to align");
        sub.bind_dbl("--tol", "tol", gpa_opt.tol,
                     "convergence threshold on the objective decrease");
        sub.bind_int("--max-iter", "max_iter", gpa_opt.max_iter,
                     "iteration cap");
        sub.bind_off_flag("--no-scale", "scale", gpa_opt.scale,
                          "skip unit centroid-size normalization");
        sub.bind_on_flag("--robust", "robust", gpa_opt.robust,
                         "median centering and median reference");
        sub.run = [&] {
            if (gpa_input.empty())
                throw UsageError("gpa requires --input (or config key input)");
            const LandmarkFile file = read_landmark_file(gpa_input);
            const AlignmentResult result = gpa(file.configs, gpa_opt);
            write_landmark_file(gpa_c.out + "/aligned.txt", result.aligned,
                                file.ids);
            write_landmark_file(gpa_c.out + "/reference.txt",
                                {result.reference}, {"reference"});
            std::ofstream obj(gpa_c.out + "/objective.csv");
            if (!obj)
                throw ParseError("cannot open for writing: " + gpa_c.out +
                                 "/objective.csv");
            obj << "sweep,objective\n";
            for (std::size_t i = 0; i < result.objective_history.size(); ++i)
                obj << i << "," << format_double(result.objective_history[i])
                    << "\n";
            std::printf("%s after %d sweeps\n",
                        result.converged ? "converged" : "iteration cap hit",
                        result.iterations);
        };
    }

    // ---- align ----
    static Common align_c;
    static std::string align_input;
    static std::string align_mode = "clean";
    static double align_fraction = 0.7;
    static GpaOptions align_opt;
    {
        Subcommand& sub = make_sub(
            "align", "split one sample and align train/test without leakage",
            align_c);
        sub.bind_str("--input", "input", align_input, "landmark file to split");
        sub.bind_str("--mode", "mode", align_mode,
                     "alignment protocol: clean or contaminated");
        sub.bind_dbl("--train-fraction", "train_fraction", align_fraction,
                     "fraction of specimens in the training side");
        sub.bind_dbl("--tol", "tol", align_opt.tol,
                     "convergence threshold on the objective decrease");
        sub.bind_int("--max-iter", "max_iter", align_opt.max_iter,
                     "iteration cap");
        sub.bind_off_flag("--no-scale", "scale", align_opt.scale,
                          "skip unit centroid-size normalization");
        sub.bind_on_flag("--robust", "robust", align_opt.robust,
                         "median centering and median reference");
        sub.run = [&] {
            if (align_input.empty())
                throw UsageError(
                    "align requires --input (or config key input)");
            if (align_mode != "clean" && align_mode != "contaminated")
                throw UsageError("mode must be 'clean' or 'contaminated', not '" +
                                 align_mode + "'");
            const LandmarkFile file = read_landmark_file(align_input);
            const int n = static_cast<int>(file.configs.size());
            const SplitIndices idx = split(n, align_fraction, align_c.seed);

            const SplitAlignment aligned = [&] {
                if (align_mode == "contaminated")
                    return align_contaminated(file.configs, idx, align_opt);
                std::vector<LandmarkConfig> train, test;
                for (int id : idx.train_ids)
                    train.push_back(file.configs[static_cast<std::size_t>(id)]);
                for (int id : idx.test_ids)
                    test.push_back(file.configs[static_cast<std::size_t>(id)]);
                return align_clean(train, test, align_opt);
            }();

            std::vector<std::string> train_ids, test_ids;
            for (int id : idx.train_ids)
                train_ids.push_back(file.ids[static_cast<std::size_t>(id)]);
            for (int id : idx.test_ids)
                test_ids.push_back(file.ids[static_cast<std::size_t>(id)]);
            write_landmark_file(align_c.out + "/train_aligned.txt",
                                aligned.train, train_ids);
            write_landmark_file(align_c.out + "/test_aligned.txt",
                                aligned.test, test_ids);
            write_landmark_file(align_c.out + "/reference.txt",
                                {aligned.reference}, {"reference"});

            std::vector<std::string> role(static_cast<std::size_t>(n));
            for (int id : idx.train_ids)
                role[static_cast<std::size_t>(id)] = "train";
            for (int id : idx.test_ids)
                role[static_cast<std::size_t>(id)] = "test";
            std::ofstream split_csv(align_c.out + "/split.csv");
            if (!split_csv)
                throw ParseError("cannot open for writing: " + align_c.out +
                                 "/split.csv");
            split_csv << "id,role\n";
            for (int id = 0; id < n; ++id)
                split_csv << file.ids[static_cast<std::size_t>(id)] << ","
                          << role[static_cast<std::size_t>(id)] << "\n";
        };
    }

    // ---- loo ----
    static Common loo_c;
    static SimConfig loo_cfg = default_config(10, 10, 2);
    static std::string loo_sizes = "10,20,50,100,200";
    static int loo_replicates = 100;
    static int loo_boot = 1000;
    {
        Subcommand& sub = make_sub(
            "loo", "leave-one-out alignment displacement by sample size",
            loo_c);
        sub.bind_str("--sizes", "sizes", loo_sizes,
                     "comma-separated sample sizes");
        sub.bind_int("--p", "p", loo_cfg.p, "landmark count");
        bind_sim(sub, loo_cfg, false);
        sub.bind_int("--replicates", "replicates", loo_replicates,
                     "replicates per size");
        sub.bind_int("--boot-reps", "boot_reps", loo_boot,
                     "bootstrap resamples for the CI");
        sub.run = [&] {
            const std::vector<int> sizes = parse_int_list("sizes", loo_sizes);
            const std::vector<ExperimentRecord> records = run_loo_instability(
                loo_cfg, sizes, loo_replicates, loo_boot, loo_c.seed, {},
                "default", loo_c.threads);
            write_sorted_records(records, loo_c.out + "/records.csv");
            write_svg_file(
                loo_c.out + "/loo_boxplot.svg",
                render_boxplot(filter_metrics(records, {"mean_displacement"}),
                               "n"));
        };
    }

    // ---- contamination ----
    static Common cont_c;
    static SimConfig cont_cfg = default_config(40, 12, 2);
    static int cont_replicates = 200;
    static int cont_boot = 1000;
    {
        Subcommand& sub = make_sub(
            "contamination",
            "joint-alignment versus leakage-free pipeline error", cont_c);
        bind_sim(sub, cont_cfg, true);
        sub.bind_int("--replicates", "replicates", cont_replicates,
                     "simulation replicates");
        sub.bind_int("--boot-reps", "boot_reps", cont_boot,
                     "bootstrap resamples for the CI");
        sub.run = [&] {
            const std::vector<ExperimentRecord> records =
                run_contamination(cont_cfg, cont_replicates, cont_c.seed, {},
                                  cont_boot, "default", cont_c.threads);
            write_sorted_records(records, cont_c.out + "/records.csv");
            write_svg_file(
                cont_c.out + "/rmse_boxplot.svg",
                render_boxplot(filter_metrics(
                                   records, {"rmse_clean", "rmse_contaminated"}),
                               "metric"));
            write_svg_file(
                cont_c.out + "/delta_boxplot.svg",
                render_boxplot(filter_metrics(records, {"delta_rmse"}),
                               "metric"));
        };
    }

    // ---- grid ----
    static Common grid_c;
    static SimConfig grid_cfg = default_config(4, 3, 2);
    static std::string grid_ns = "20,40,60,80,100,120,140,160,180,200";
    static std::string grid_ps = "4,8,12,16,20,24,28,32,36,40,44,48,52,56,60,64";
    static int grid_replicates = 20;
    static double grid_quantile = 0.8;
    static std::string grid_condition = "default";
    {
        Subcommand& sub = make_sub(
            "grid", "error surface over the sample-size/landmark grid",
            grid_c);
        sub.bind_str("--n-list", "n_list", grid_ns,
                     "comma-separated sample sizes");
        sub.bind_str("--p-list", "p_list", grid_ps,
                     "comma-separated landmark counts");
        bind_sim(sub, grid_cfg, false);
        sub.bind_int("--replicates", "replicates", grid_replicates,
                     "replicates per cell");
        sub.bind_dbl("--quantile", "quantile", grid_quantile,
                     "stability threshold quantile for the boundary fit");
        sub.bind_str("--condition", "condition", grid_condition,
                     "label stored with every record");
        sub.run = [&] {
            const std::vector<int> ns = parse_int_list("n_list", grid_ns);
            const std::vector<int> ps = parse_int_list("p_list", grid_ps);
            std::vector<ExperimentRecord> records =
                run_grid(ns, ps, grid_cfg.k, grid_cfg, grid_condition,
                         grid_replicates, grid_c.seed, {}, grid_c.threads);

            bool have_fit = false;
            BoundaryFit fit;
            try {
                fit = fit_boundary(records, grid_quantile);
                have_fit = true;
            } catch (const Error& e) {
                std::fprintf(stderr, "boundary fit skipped: %s\n", e.what());
            }
            if (have_fit) {
                records.push_back({"grid", 0, 0, grid_cfg.k, grid_condition,
                                   -1, grid_c.seed, "boundary_slope",
                                   fit.slope});
                records.push_back({"grid", 0, 0, grid_cfg.k, grid_condition,
                                   -1, grid_c.seed, "boundary_intercept",
                                   fit.intercept});
                records.push_back({"grid", 0, 0, grid_cfg.k, grid_condition,
                                   -1, grid_c.seed, "boundary_threshold",
                                   fit.threshold});
                records.push_back({"grid", 0, 0, grid_cfg.k, grid_condition,
                                   -1, grid_c.seed, "boundary_cells",
                                   static_cast<double>(fit.cells_used)});
            }
            write_sorted_records(records, grid_c.out + "/records.csv");
            write_svg_file(grid_c.out + "/heatmap_rmse_clean.svg",
                           render_heatmap(records, "rmse_clean_mean",
                                          have_fit ? &fit : nullptr));
            write_svg_file(grid_c.out + "/heatmap_delta_rmse.svg",
                           render_heatmap(records, "delta_rmse_mean"));
        };
    }

    // ---- sensitivity ----
    static Common sens_c;
    static int sens_k = 2;
    static std::string sens_ns = "20,40,60,80,100,120,140,160,180,200";
    static std::string sens_ps = "4,8,12,16,20,24,28,32,36,40,44,48,52,56,60,64";
    static int sens_replicates = 20;
    static double sens_quantile = 0.8;
    {
        Subcommand& sub = make_sub(
            "sensitivity",
            "grid plus boundary fit across generator presets", sens_c);
        sub.bind_int("--k", "k", sens_k, "spatial dimension (2 or 3)");
        sub.bind_str("--n-list", "n_list", sens_ns,
                     "comma-separated sample sizes");
        sub.bind_str("--p-list", "p_list", sens_ps,
                     "comma-separated landmark counts");
        sub.bind_int("--replicates", "replicates", sens_replicates,
                     "replicates per cell");
        sub.bind_dbl("--quantile", "quantile", sens_quantile,
                     "stability threshold quantile for the boundary fit");
        sub.run = [&] {
            const auto presets = sensitivity_presets(sens_k);
            const std::vector<int> ns = parse_int_list("n_list", sens_ns);
            const std::vector<int> ps = parse_int_list("p_list", sens_ps);
            const std::vector<ExperimentRecord> records = run_sensitivity(
                presets, ns, ps, sens_k, sens_replicates, sens_quantile,
                sens_c.seed, {}, sens_c.threads);
            write_sorted_records(records, sens_c.out + "/records.csv");

            for (const auto& [name, cfg] : presets) {
                std::vector<ExperimentRecord> mine;
                BoundaryFit fit;
                bool have_fit = false;
                for (const ExperimentRecord& r : records) {
                    if (r.condition != name)
                        continue;
                    mine.push_back(r);
                    if (r.metric == "boundary_slope") {
                        fit.slope = r.value;
                        have_fit = true;
                    }
                    if (r.metric == "boundary_intercept")
                        fit.intercept = r.value;
                }
                write_svg_file(sens_c.out + "/heatmap_" + name + ".svg",
                               render_heatmap(mine, "rmse_clean_mean",
                                              have_fit ? &fit : nullptr));
            }
        };
    }

    // ---- spatial ----
    static Common spat_c;
    static SimConfig spat_cfg = spatial_default_config();
    static int spat_replicates = 300;
    static int spat_boot = 1000;
    static TrainSpec spat_train;
    static ConvSpec spat_conv;
    {
        Subcommand& sub = make_sub(
            "spatial",
            "paired flat-linear versus structured-kernel regression", spat_c);
        bind_sim(sub, spat_cfg, true);
        sub.bind_int("--replicates", "replicates", spat_replicates,
                     "paired training replicates");
        sub.bind_int("--epochs", "epochs", spat_train.epochs,
                     "training epochs");
        sub.bind_int("--batch-size", "batch_size", spat_train.batch_size,
                     "minibatch size");
        sub.bind_dbl("--lr", "learning_rate", spat_train.learning_rate,
                     "optimizer step size");
        sub.bind_int("--channels", "channels", spat_conv.channels,
                     "kernel output channels");
        sub.bind_int("--kernel-span", "kernel_span", spat_conv.kernel_span,
                     "landmarks covered by the kernel (0 = all)");
        sub.bind_int("--boot-reps", "boot_reps", spat_boot,
                     "bootstrap resamples for the CI");
        sub.run = [&] {
            const std::vector<ExperimentRecord> records = run_spatial(
                spat_cfg, spat_replicates, spat_train, spat_conv, spat_c.seed,
                {}, "default", spat_boot, spat_c.threads);
            write_sorted_records(records, spat_c.out + "/records.csv");
            write_svg_file(
                spat_c.out + "/spatial_boxplot.svg",
                render_boxplot(
                    filter_metrics(records, {"rmse_linear", "rmse_conv"}),
                    "metric"));
        };
    }

    // ---- pca-null ----
    static Common pca_c;
    static std::string pca_ps = "5,8,20,40,60";
    static std::string pca_ks = "2,3";
    static int pca_multiplier = 100;
    static std::string pca_alphas = "1";
    {
        Subcommand& sub = make_sub(
            "pca-null",
            "isotropic-null cumulative variance and spectrum rank", pca_c);
        sub.bind_str("--p-list", "p_list", pca_ps,
                     "comma-separated landmark counts");
        sub.bind_str("--k-list", "k_list", pca_ks,
                     "comma-separated spatial dimensions");
        sub.bind_int("--multiplier", "multiplier", pca_multiplier,
                     "specimens per tangent-space dimension");
        sub.bind_str("--alpha-list", "alpha_list", pca_alphas,
                     "comma-separated component fractions");
        sub.run = [&] {
            const std::vector<ExperimentRecord> records = run_pca_null(
                parse_int_list("p_list", pca_ps),
                parse_int_list("k_list", pca_ks), pca_multiplier,
                parse_dbl_list("alpha_list", pca_alphas), pca_c.seed);
            write_sorted_records(records, pca_c.out + "/records.csv");
        };
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const std::map<std::string, Common*> commons{
        {"simulate", &sim_c},       {"gpa", &gpa_c},
        {"align", &align_c},        {"loo", &loo_c},
        {"contamination", &cont_c}, {"grid", &grid_c},
        {"sensitivity", &sens_c},   {"spatial", &spat_c},
        {"pca-null", &pca_c},
    };

    try {
        for (auto& [name, sub] : subs) {
            if (!sub.app->parsed())
                continue;
            Common& common = *commons.at(name);
            apply_config(sub, common.config, name);
            std::error_code ec;
            fs::create_directories(common.out, ec);
            if (ec)
                throw UsageError("cannot create output directory '" +
                                 common.out + "': " + ec.message());
            write_manifest(sub, name, common.out);
            sub.run();
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const procml::NumericError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const procml::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
