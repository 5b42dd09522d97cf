#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lrising {

/// Experiment configuration shared by every CLI command. Keys are flat
/// "section.key" strings; unknown keys are rejected. A config file holds
/// one "section.key = value" per line ('#' starts a comment), and the same
/// keys are accepted as --section.key=value command-line overrides.
///
/// Seeds: each section owns one. A global seed replaces them all by
/// derivation seed + section index, in the order mcmc=0, rbm=1, flow=2,
/// rg=3, stack=4, thermometer=5, vh=6.
struct ExperimentConfig {
    // lattice
    int lattice_side = 10;
    double lattice_alpha = 3.0;
    double lattice_mu = 0.0;

    // mcmc
    std::vector<double> mcmc_temps;  // default 0:0.1:14
    std::uint64_t mcmc_burn_in = kAuto;  // auto: 500 * N proposals
    std::uint64_t mcmc_stride = kAuto;   // auto: N proposals (one sweep)
    std::uint64_t mcmc_n_samples = 2000;
    std::uint64_t mcmc_seed = 1;

    // rbm
    int rbm_n_hidden = 81;
    std::vector<double> rbm_temps;  // training grid, default 0:0.5:14
    std::int64_t rbm_steps = 30000;
    double rbm_learning_rate = 1e-3;
    std::int64_t rbm_batch = 1000;
    int rbm_cd_k = 1;
    bool rbm_data_hidden_mean_field = false;
    std::uint64_t rbm_seed = 2;

    // flow
    int flow_length = 50;
    double flow_seed_temperature = 0.0;
    std::uint64_t flow_seed = 3;

    // rg
    int rg_steps = 3;
    double rg_seed_temperature = 7.7;
    std::uint64_t rg_seed = 4;

    // stack
    int stack_n_layers = 3;
    std::int64_t stack_steps = 400;
    double stack_learning_rate = 1e-3;
    std::int64_t stack_batch = 200;
    int stack_cd_k = 1;
    double stack_seed_temperature = 7.7;
    bool stack_desk_scale = true;  // guards against the expensive 64x64 run
    std::uint64_t stack_seed = 5;

    // thermometer
    std::vector<double> thermometer_temps;  // default 0:0.5:14
    int thermometer_width = 64;
    int thermometer_epochs = 50;
    double thermometer_learning_rate = 1e-3;
    std::int64_t thermometer_batch = 100;
    double thermometer_holdout = 0.1;
    bool thermometer_symmetrize = true;  // train on flip-augmented data
    std::uint64_t thermometer_seed = 6;

    // vh
    std::string vh_source = "both";  // both | rbm | rg
    int vh_pgm_top = 8;
    std::uint64_t vh_seed = 7;

    // output
    std::string output_dir;

    static constexpr std::uint64_t kAuto = ~std::uint64_t{0};

    ExperimentConfig();

    /// Parses and validates one key; throws on unknown keys or bad values.
    void apply(const std::string& key, const std::string& value);

    /// Defaults, then file entries, then overrides, then the optional global
    /// seed substitution.
    static ExperimentConfig load(const std::optional<std::filesystem::path>& file,
                                 std::span<const std::string> overrides,
                                 std::optional<std::uint64_t> global_seed);

    /// All keys, listable for CLI registration.
    static std::vector<std::string> known_keys();

    /// Canonical "key=value" lines in fixed key order.
    std::string canonical_text() const;
    std::uint64_t config_hash() const;

    std::uint64_t burn_in_for(int side) const;
    std::uint64_t stride_for(int side) const;

private:
    std::map<std::string, std::string> raw_;
};

/// Temperature grid syntax: either "start:step:stop" (inclusive, evaluated
/// with decimal arithmetic so 0.1 steps land on exact grid points) or a
/// comma-separated list.
std::vector<double> parse_temperature_grid(const std::string& text);

}  // namespace lrising
