#include <charconv>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrising/commands.hpp"
#include "lrising/config.hpp"

namespace {

struct CliState {
    std::string config_file;
    std::string out_dir;
    std::string global_seed;
    std::vector<std::string> key_overrides;  // "section.key=value"
    std::vector<std::string> set_overrides;
};

void register_common(CLI::App* sub, CliState& state) {
    sub->add_option("--config", state.config_file, "Config file: one 'section.key = value' per line");
    sub->add_option("--out", state.out_dir, "Output directory (shorthand for --output.dir)");
    sub->add_option("--seed", state.global_seed,
                    "Global seed; replaces every section seed by seed + section index");
    sub->add_option("--set", state.set_overrides, "Explicit section.key=value override")
        ->take_all();
    for (const std::string& key : lrising::ExperimentConfig::known_keys()) {
        sub->add_option_function<std::string>(
               "--" + key,
               [key, &state](const std::string& value) {
                   state.key_overrides.push_back(key + "=" + value);
               },
               "Override config key " + key)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Long-range Ising lattice pipeline: MCMC sampling, scaling dimensions, RBM "
                 "training and flows, block-spin RG, stacked-RBM comparison, and supervised "
                 "temperature measurement"};
    app.require_subcommand(1);

    CliState state;
    const std::map<std::string, std::function<void(const lrising::ExperimentConfig&)>> commands = {
        {"sample", lrising::cli::cmd_sample},     {"scaling", lrising::cli::cmd_scaling},
        {"rbm-train", lrising::cli::cmd_rbm_train}, {"thermo", lrising::cli::cmd_thermo},
        {"flow", lrising::cli::cmd_flow},         {"rg", lrising::cli::cmd_rg},
        {"stack", lrising::cli::cmd_stack},       {"vh", lrising::cli::cmd_vh},
    };
    const std::map<std::string, std::string> descriptions = {
        {"sample", "Generate MCMC sample files, one per temperature"},
        {"scaling", "Fit Delta_s / Delta_eps per temperature and locate T_c"},
        {"rbm-train", "Train the single RBM on the configured temperature grid"},
        {"thermo", "Train the supervised temperature classifier"},
        {"flow", "Generate and measure an RBM flow from seed configurations"},
        {"rg", "Block-spin coarse-graining of a sample file"},
        {"stack", "Greedy layer-wise training of the stacked RBM"},
        {"vh", "Visible-hidden correlation maps for stack and RG flows"},
    };
    for (const auto& [name, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        register_common(sub, state);
    }

    CLI11_PARSE(app, argc, argv);
    const std::string name = app.get_subcommands().front()->get_name();

    try {
        std::vector<std::string> overrides = state.key_overrides;
        if (!state.out_dir.empty()) overrides.push_back("output.dir=" + state.out_dir);
        overrides.insert(overrides.end(), state.set_overrides.begin(), state.set_overrides.end());

        std::optional<std::uint64_t> global_seed;
        if (!state.global_seed.empty()) {
            std::uint64_t value = 0;
            const auto [ptr, ec] = std::from_chars(
                state.global_seed.data(), state.global_seed.data() + state.global_seed.size(), value);
            if (ec != std::errc{} || ptr != state.global_seed.data() + state.global_seed.size()) {
                throw std::invalid_argument("--seed expects a non-negative integer");
            }
            global_seed = value;
        }

        std::optional<std::filesystem::path> config_path;
        if (!state.config_file.empty()) config_path = state.config_file;
        const lrising::ExperimentConfig config =
            lrising::ExperimentConfig::load(config_path, overrides, global_seed);

        commands.at(name)(config);
    } catch (const std::exception& e) {
        std::cerr << "error: command=" << name << " message=\"" << e.what() << "\"\n";
        return 1;
    }
    return 0;
}
