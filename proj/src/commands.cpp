#include "lrising/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "lrising/flow.hpp"
#include "lrising/io.hpp"
#include "lrising/mcmc.hpp"
#include "lrising/observables.hpp"
#include "lrising/rbm.hpp"
#include "lrising/rg.hpp"
#include "lrising/stack.hpp"
#include "lrising/thermometer.hpp"

namespace lrising::cli {

namespace fs = std::filesystem;

namespace {

// One invocation owns the output directory for its lifetime.
class DirectoryLock {
public:
    explicit DirectoryLock(const fs::path& dir) : lock_path_(dir / ".lrising.lock") {
        std::FILE* f = std::fopen(lock_path_.string().c_str(), "wx");
        if (!f) {
            throw std::runtime_error("output directory " + dir.string() +
                                     " is locked by another invocation (" + lock_path_.string() +
                                     " exists)");
        }
        std::fclose(f);
    }
    ~DirectoryLock() {
        std::error_code ec;
        fs::remove(lock_path_, ec);
    }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    fs::path lock_path_;
};

fs::path output_dir(const ExperimentConfig& config) {
    if (config.output_dir.empty()) {
        throw std::invalid_argument("output.dir must be set");
    }
    fs::path dir(config.output_dir);
    fs::create_directories(dir);
    return dir;
}

void require_artifact(const fs::path& path, const std::string& producing_command) {
    if (!fs::exists(path)) {
        throw std::runtime_error("missing artifact " + path.string() + "; produce it with the `" +
                                 producing_command + "` command first");
    }
}

std::string stamp(const ExperimentConfig& config, std::uint64_t seed) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config.config_hash()));
    return "config_fnv1a=" + std::string(hash) + " seed=" + std::to_string(seed);
}

SampleSet load_samples_at(const ExperimentConfig& config, const fs::path& dir, double temperature,
                          int expected_side) {
    const fs::path path = sample_path(dir, temperature);
    require_artifact(path, "sample");
    io::LoadedSamples loaded = io::read_samples(path);
    if (loaded.samples.geometry.side() != expected_side) {
        throw std::runtime_error(path.string() + " holds side-" +
                                 std::to_string(loaded.samples.geometry.side()) +
                                 " grids, expected side " + std::to_string(expected_side));
    }
    if (loaded.samples.geometry.alpha() != config.lattice_alpha) {
        throw std::runtime_error(path.string() + " was generated with alpha=" +
                                 io::format_double(loaded.samples.geometry.alpha()) +
                                 ", config says " + io::format_double(config.lattice_alpha));
    }
    return std::move(loaded.samples);
}

std::vector<NodeState> flatten_sets(const std::vector<SampleSet>& sets) {
    std::vector<NodeState> data;
    for (const auto& set : sets) {
        for (const auto& grid : set.grids) {
            data.emplace_back(grid.values().begin(), grid.values().end());
        }
    }
    return data;
}

struct ScanPoint {
    double temperature;
    std::optional<PowerLawFit> spin_fit;
    std::optional<PowerLawFit> energy_fit;
};

double fit_or_nan(const std::optional<PowerLawFit>& fit, double PowerLawFit::*member) {
    return fit ? (*fit).*member : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

fs::path sample_path(const fs::path& dir, double temperature) {
    return dir / ("samples_T" + io::format_double(temperature) + ".spnl");
}
fs::path rbm_path(const fs::path& dir) { return dir / "rbm.rbmw"; }
fs::path rbm_trace_path(const fs::path& dir) { return dir / "rbm_trace.csv"; }
fs::path thermometer_path(const fs::path& dir, int side) {
    return dir / ("thermometer_L" + std::to_string(side) + ".thrm");
}
fs::path thermometer_trace_path(const fs::path& dir, int side) {
    return dir / ("thermometer_L" + std::to_string(side) + "_trace.csv");
}
fs::path scaling_path(const fs::path& dir) { return dir / "scaling.csv"; }
fs::path tc_report_path(const fs::path& dir) { return dir / "tc_report.csv"; }
fs::path flow_path(const fs::path& dir, double temperature) {
    return dir / ("flow_T" + io::format_double(temperature) + ".csv");
}
fs::path rg_step_path(const fs::path& dir, int step) {
    return dir / ("rg_step" + std::to_string(step) + ".spnl");
}
fs::path stack_layer_path(const fs::path& dir, int layer) {
    return dir / ("stack_layer" + std::to_string(layer) + ".rbmw");
}
fs::path vh_matrix_path(const fs::path& dir, const std::string& source, int layer) {
    return dir / ("vh_" + source + "_l" + std::to_string(layer) + ".csv");
}
fs::path vh_manifest_path(const fs::path& dir) { return dir / "vh_manifest.csv"; }

void cmd_sample(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    const LatticeGeometry geom(config.lattice_side, config.lattice_alpha, config.lattice_mu);
    const CouplingKernel kernel = build_kernel(geom);
    for (std::size_t k = 0; k < config.mcmc_temps.size(); ++k) {
        McmcConfig cfg;
        cfg.temperature = config.mcmc_temps[k];
        cfg.burn_in_steps = config.burn_in_for(geom.side());
        cfg.stride = config.stride_for(geom.side());
        cfg.seed = config.mcmc_seed + k;  // one independent chain per temperature
        const SampleSet samples = run_chain(geom, kernel, cfg, config.mcmc_n_samples);
        io::write_samples(sample_path(dir, cfg.temperature), samples, cfg.seed);
    }
    std::cout << "wrote " << config.mcmc_temps.size() << " sample files to " << dir.string()
              << "\n";
}

void cmd_scaling(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    const LatticeGeometry geom(config.lattice_side, config.lattice_alpha, config.lattice_mu);
    const CouplingKernel kernel = build_kernel(geom);
    const double r_min = 1.0;
    const double r_max = geom.side() / 2.0;

    std::vector<ScanPoint> points;
    for (const double temperature : config.mcmc_temps) {
        const SampleSet samples = load_samples_at(config, dir, temperature, geom.side());
        ScanPoint point{temperature, {}, {}};
        try {
            point.spin_fit = fit_power_law(spin_correlator(samples), r_min, r_max);
        } catch (const std::runtime_error&) {
        }
        try {
            point.energy_fit = fit_power_law(energy_correlator(samples, kernel), r_min, r_max);
        } catch (const std::runtime_error&) {
        }
        points.push_back(std::move(point));
    }

    const std::string columns[] = {"temperature", "delta_s",     "delta_s_err", "amplitude_s",
                                   "residual_s",  "delta_e",     "delta_e_err", "amplitude_e",
                                   "residual_e"};
    io::CsvWriter csv(scaling_path(dir), stamp(config, config.mcmc_seed), columns);
    for (const auto& point : points) {
        const double row[] = {point.temperature,
                              fit_or_nan(point.spin_fit, &PowerLawFit::delta),
                              fit_or_nan(point.spin_fit, &PowerLawFit::delta_std_err),
                              fit_or_nan(point.spin_fit, &PowerLawFit::amplitude),
                              fit_or_nan(point.spin_fit, &PowerLawFit::residual),
                              fit_or_nan(point.energy_fit, &PowerLawFit::delta),
                              fit_or_nan(point.energy_fit, &PowerLawFit::delta_std_err),
                              fit_or_nan(point.energy_fit, &PowerLawFit::amplitude),
                              fit_or_nan(point.energy_fit, &PowerLawFit::residual)};
        csv.row(row);
    }

    std::vector<std::pair<double, double>> curve;
    for (const auto& point : points) {
        curve.emplace_back(point.temperature, fit_or_nan(point.energy_fit, &PowerLawFit::delta));
    }
    const double tc = find_tc(curve);

    // Delta_s at T_c by linear interpolation between the bracketing scan
    // temperatures with finite fits.
    double delta_s_at_tc = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> spin_curve;
    for (const auto& point : points) {
        const double d = fit_or_nan(point.spin_fit, &PowerLawFit::delta);
        if (std::isfinite(d)) spin_curve.emplace_back(point.temperature, d);
    }
    std::sort(spin_curve.begin(), spin_curve.end());
    for (std::size_t k = 0; k + 1 < spin_curve.size(); ++k) {
        if (spin_curve[k].first <= tc && tc <= spin_curve[k + 1].first) {
            const double t = (tc - spin_curve[k].first) /
                             (spin_curve[k + 1].first - spin_curve[k].first);
            delta_s_at_tc = spin_curve[k].second +
                            t * (spin_curve[k + 1].second - spin_curve[k].second);
            break;
        }
    }

    const std::string tc_columns[] = {"tc", "delta_s_at_tc"};
    io::CsvWriter tc_csv(tc_report_path(dir), stamp(config, config.mcmc_seed), tc_columns);
    const double tc_row[] = {tc, delta_s_at_tc};
    tc_csv.row(tc_row);
    std::cout << "tc=" << io::format_double(tc)
              << " delta_s_at_tc=" << io::format_double(delta_s_at_tc) << "\n";
}

void cmd_rbm_train(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    std::vector<SampleSet> sets;
    for (const double temperature : config.rbm_temps) {
        sets.push_back(load_samples_at(config, dir, temperature, config.lattice_side));
    }
    const std::vector<NodeState> data = flatten_sets(sets);
    sets.clear();

    TrainConfig cfg;
    cfg.steps = config.rbm_steps;
    cfg.learning_rate = config.rbm_learning_rate;
    cfg.batch_size = config.rbm_batch;
    cfg.cd_k = config.rbm_cd_k;
    cfg.seed = config.rbm_seed;
    cfg.data_hidden_mean_field = config.rbm_data_hidden_mean_field;
    const TrainResult result = train_rbm(data, config.rbm_n_hidden, cfg);

    io::write_rbm(rbm_path(dir), result.params);
    const std::string columns[] = {"step", "reconstruction_error"};
    io::CsvWriter csv(rbm_trace_path(dir), stamp(config, cfg.seed), columns);
    for (std::size_t k = 0; k < result.trace.reconstruction_error.size(); ++k) {
        const double row[] = {static_cast<double>(k), result.trace.reconstruction_error[k]};
        csv.row(row);
    }
    std::cout << "wrote " << rbm_path(dir).string() << "\n";
}

void cmd_thermo(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    std::vector<std::pair<SpinGrid, double>> labeled;
    for (const double temperature : config.thermometer_temps) {
        SampleSet samples = load_samples_at(config, dir, temperature, config.lattice_side);
        for (auto& grid : samples.grids) labeled.emplace_back(std::move(grid), temperature);
    }

    ThermometerTrainConfig cfg;
    cfg.epochs = config.thermometer_epochs;
    cfg.learning_rate = config.thermometer_learning_rate;
    cfg.batch_size = config.thermometer_batch;
    cfg.hidden_width = config.thermometer_width;
    cfg.holdout_fraction = config.thermometer_holdout;
    cfg.symmetrize = config.thermometer_symmetrize;
    cfg.seed = config.thermometer_seed;
    const ThermometerTrainResult result =
        train_thermometer(labeled, config.thermometer_temps, cfg);

    io::write_thermometer(thermometer_path(dir, config.lattice_side), result.model);
    const std::string columns[] = {"epoch", "mean_cross_entropy"};
    io::CsvWriter csv(thermometer_trace_path(dir, config.lattice_side),
                      stamp(config, cfg.seed) +
                          " holdout_accuracy=" + io::format_double(result.holdout_accuracy),
                      columns);
    for (std::size_t k = 0; k < result.epoch_loss.size(); ++k) {
        const double row[] = {static_cast<double>(k), result.epoch_loss[k]};
        csv.row(row);
    }
    std::cout << "holdout_accuracy=" << io::format_double(result.holdout_accuracy) << "\n";
}

void cmd_flow(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    const LatticeGeometry geom(config.lattice_side, config.lattice_alpha, config.lattice_mu);
    const CouplingKernel kernel = build_kernel(geom);

    require_artifact(rbm_path(dir), "rbm-train");
    const RbmParams params = io::read_rbm(rbm_path(dir));
    require_artifact(thermometer_path(dir, geom.side()), "thermo");
    const ThermometerModel thermometer = io::read_thermometer(thermometer_path(dir, geom.side()));
    const SampleSet seed_set =
        load_samples_at(config, dir, config.flow_seed_temperature, geom.side());

    Rng rng(config.flow_seed);
    FlowTrace trace = rbm_flow(seed_set, params, config.flow_length, rng);
    measure_flow(trace, kernel, thermometer);

    std::vector<std::string> columns = {"step",        "delta_s",  "delta_s_err", "delta_e",
                                        "delta_e_err", "temp_mean", "temp_argmax"};
    for (const double t : thermometer.class_temperatures) {
        columns.push_back("p_T" + io::format_double(t));
    }
    io::CsvWriter csv(flow_path(dir, config.flow_seed_temperature),
                      stamp(config, config.flow_seed), columns);
    for (const auto& step : trace.steps) {
        std::vector<double> row = {static_cast<double>(step.index),
                                   fit_or_nan(step.spin_fit, &PowerLawFit::delta),
                                   fit_or_nan(step.spin_fit, &PowerLawFit::delta_std_err),
                                   fit_or_nan(step.energy_fit, &PowerLawFit::delta),
                                   fit_or_nan(step.energy_fit, &PowerLawFit::delta_std_err),
                                   step.mean_temperature};
        const auto arg = static_cast<std::size_t>(
            std::max_element(step.temperature_probs.begin(), step.temperature_probs.end()) -
            step.temperature_probs.begin());
        row.push_back(thermometer.class_temperatures[arg]);
        row.insert(row.end(), step.temperature_probs.begin(), step.temperature_probs.end());
        csv.row(row);
    }
    std::cout << "wrote " << flow_path(dir, config.flow_seed_temperature).string() << "\n";
}

void cmd_rg(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    const SampleSet samples =
        load_samples_at(config, dir, config.rg_seed_temperature, config.lattice_side);
    Rng rng(config.rg_seed);
    const std::vector<SampleSet> flow = rg_flow(samples, config.rg_steps, rng);
    for (std::size_t k = 0; k < flow.size(); ++k) {
        io::write_samples(rg_step_path(dir, static_cast<int>(k) + 1), flow[k], config.rg_seed);
    }
    std::cout << "wrote " << flow.size() << " coarse-grained sample files\n";
}

void cmd_stack(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    if (config.stack_desk_scale && config.lattice_side > 32) {
        throw std::invalid_argument(
            "lattice.side > 32 with stack.desk_scale=true; pass stack.desk_scale=false to "
            "acknowledge the full-scale run");
    }
    const SampleSet samples =
        load_samples_at(config, dir, config.stack_seed_temperature, config.lattice_side);

    StackSpec spec;
    int nodes = samples.geometry.site_count();
    spec.layer_sizes.push_back(nodes);
    for (int l = 0; l < config.stack_n_layers; ++l) {
        if (nodes % 4 != 0) {
            throw std::invalid_argument("lattice does not support " +
                                        std::to_string(config.stack_n_layers) + " quartering layers");
        }
        nodes /= 4;
        spec.layer_sizes.push_back(nodes);
        TrainConfig cfg;
        cfg.steps = config.stack_steps;
        cfg.learning_rate = config.stack_learning_rate;
        cfg.batch_size = std::min<std::int64_t>(config.stack_batch,
                                                static_cast<std::int64_t>(samples.grids.size()));
        cfg.cd_k = config.stack_cd_k;
        cfg.seed = config.stack_seed + static_cast<std::uint64_t>(l);
        spec.layer_configs.push_back(cfg);
    }
    const std::vector<RbmParams> stack = train_stack(samples, spec);
    for (std::size_t l = 0; l < stack.size(); ++l) {
        io::write_rbm(stack_layer_path(dir, static_cast<int>(l) + 1), stack[l]);
    }
    std::cout << "wrote " << stack.size() << " stack layers\n";
}

void cmd_vh(const ExperimentConfig& config) {
    const fs::path dir = output_dir(config);
    DirectoryLock lock(dir);
    const SampleSet samples =
        load_samples_at(config, dir, config.stack_seed_temperature, config.lattice_side);
    const int n_visible = samples.geometry.site_count();
    const int side = samples.geometry.side();

    struct MatrixRecord {
        std::string source;
        int layer;
        int n_coarse;
        std::vector<double> matrix;
    };
    std::vector<MatrixRecord> records;

    Rng rng(config.vh_seed);
    if (config.vh_source == "both" || config.vh_source == "rbm") {
        std::vector<RbmParams> stack;
        for (int l = 1; l <= config.stack_n_layers; ++l) {
            require_artifact(stack_layer_path(dir, l), "stack");
            stack.push_back(io::read_rbm(stack_layer_path(dir, l)));
        }
        for (int l = 1; l <= config.stack_n_layers; ++l) {
            MatrixRecord rec{"rbm", l, stack[static_cast<std::size_t>(l - 1)].n_hidden, {}};
            rec.matrix = vh_matrix_rbm(samples, stack, l, rng);
            records.push_back(std::move(rec));
        }
    }
    if (config.vh_source == "both" || config.vh_source == "rg") {
        for (int l = 1; l <= config.stack_n_layers; ++l) {
            const int coarse_side = side >> l;
            MatrixRecord rec{"rg", l, coarse_side * coarse_side, {}};
            rec.matrix = vh_matrix_rg(samples, l, rng);
            records.push_back(std::move(rec));
        }
    }

    const std::string manifest_columns[] = {"source", "layer", "hidden_index",
                                            "map_variance", "rank", "pgm"};
    io::CsvWriter manifest(vh_manifest_path(dir), stamp(config, config.vh_seed),
                           manifest_columns);

    for (const auto& rec : records) {
        std::vector<std::string> columns;
        columns.reserve(static_cast<std::size_t>(rec.n_coarse));
        for (int a = 0; a < rec.n_coarse; ++a) columns.push_back("h" + std::to_string(a));
        io::CsvWriter matrix_csv(vh_matrix_path(dir, rec.source, rec.layer),
                                 stamp(config, config.vh_seed), columns);
        std::vector<double> row(static_cast<std::size_t>(rec.n_coarse));
        for (int i = 0; i < n_visible; ++i) {
            const double* src = rec.matrix.data() + static_cast<std::size_t>(i) * rec.n_coarse;
            std::copy(src, src + rec.n_coarse, row.begin());
            matrix_csv.row(row);
        }

        // Rank units by map variance; the top few become graymaps.
        std::vector<std::pair<double, int>> ranked;
        for (int a = 0; a < rec.n_coarse; ++a) {
            double mean = 0.0, mean_sq = 0.0;
            for (int i = 0; i < n_visible; ++i) {
                const double v = rec.matrix[static_cast<std::size_t>(i) * rec.n_coarse + a];
                mean += v;
                mean_sq += v * v;
            }
            mean /= n_visible;
            mean_sq /= n_visible;
            ranked.emplace_back(mean_sq - mean * mean, a);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
            return x.first > y.first || (x.first == y.first && x.second < y.second);
        });
        std::vector<std::string> pgm_names(static_cast<std::size_t>(rec.n_coarse));
        for (int r = 0; r < std::min(config.vh_pgm_top, rec.n_coarse); ++r) {
            const int a = ranked[static_cast<std::size_t>(r)].second;
            const VhCorrelationMap map =
                vh_map_from_matrix(rec.matrix, n_visible, rec.n_coarse, rec.layer, a);
            const std::string name =
                "vh_" + rec.source + "_l" + std::to_string(rec.layer) + "_h" + std::to_string(a) +
                ".pgm";
            io::write_pgm(dir / name, side, side, map.values);
            pgm_names[static_cast<std::size_t>(a)] = name;
        }
        for (int r = 0; r < rec.n_coarse; ++r) {
            const auto& [variance, a] = ranked[static_cast<std::size_t>(r)];
            const std::string cells[] = {rec.source,
                                         std::to_string(rec.layer),
                                         std::to_string(a),
                                         io::format_double(variance),
                                         std::to_string(r),
                                         pgm_names[static_cast<std::size_t>(a)]};
            manifest.row(cells);
        }
    }
    std::cout << "wrote " << records.size() << " vh matrices\n";
}

}  // namespace lrising::cli
