#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "lrising/commands.hpp"
#include "lrising/io.hpp"

using namespace lrising;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lrising_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentConfig micro_config(const fs::path& dir) {
    ExperimentConfig config;
    config.apply("lattice.side", "4");
    config.apply("mcmc.temps", "1,5,9");
    config.apply("mcmc.n_samples", "40");
    config.apply("mcmc.burn_in", "2000");
    config.apply("output.dir", dir.string());
    return config;
}

}  // namespace

TEST_CASE("temperature grid parsing lands on exact decimals") {
    const std::vector<double> fig2 = parse_temperature_grid("0:0.1:14");
    CHECK(fig2.size() == 141);
    CHECK(fig2[3] == 0.3);
    CHECK(fig2[140] == 14.0);
    const std::vector<double> training = parse_temperature_grid("0:0.5:14");
    CHECK(training.size() == 29);
    CHECK(training[1] == 0.5);
    const std::vector<double> list = parse_temperature_grid("5, 7.7, 14");
    REQUIRE(list.size() == 3);
    CHECK(list[1] == 7.7);
    CHECK_THROWS_AS(parse_temperature_grid("5:0:6"), std::invalid_argument);
    CHECK_THROWS_AS(parse_temperature_grid("1:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_temperature_grid(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_temperature_grid("1,1"), std::invalid_argument);
}

TEST_CASE("unknown keys and bad values are rejected") {
    ExperimentConfig config;
    CHECK_THROWS_AS(config.apply("mcmc.typo", "1"), std::invalid_argument);
    CHECK_THROWS_AS(config.apply("lattice.side", "1"), std::invalid_argument);
    CHECK_THROWS_AS(config.apply("lattice.alpha", "-1"), std::invalid_argument);
    CHECK_THROWS_AS(config.apply("rbm.batch", "0"), std::invalid_argument);
    CHECK_THROWS_AS(config.apply("rbm.data_hidden", "maybe"), std::invalid_argument);
    CHECK_NOTHROW(config.apply("rbm.data_hidden", "meanfield"));
    CHECK(config.rbm_data_hidden_mean_field);
}

TEST_CASE("config files, overrides and the global seed compose in order") {
    const fs::path dir = fresh_dir("config");
    const fs::path file = dir / "exp.cfg";
    {
        std::ofstream out(file);
        out << "# comment line\n";
        out << "lattice.side = 6\n";
        out << "mcmc.n_samples = 77  # trailing comment\n";
    }
    const std::vector<std::string> overrides = {"lattice.side=8"};
    const ExperimentConfig config = ExperimentConfig::load(file, overrides, 100);
    CHECK(config.lattice_side == 8);
    CHECK(config.mcmc_n_samples == 77);
    CHECK(config.mcmc_seed == 100);
    CHECK(config.rbm_seed == 101);
    CHECK(config.flow_seed == 102);
    CHECK(config.rg_seed == 103);
    CHECK(config.stack_seed == 104);
    CHECK(config.thermometer_seed == 105);
    CHECK(config.vh_seed == 106);

    // The hash tracks content, not load order.
    const std::vector<std::string> same_entries = {"lattice.side=8", "mcmc.n_samples=77"};
    const ExperimentConfig same = ExperimentConfig::load(std::nullopt, same_entries, 100);
    CHECK(config.config_hash() == same.config_hash());
    const std::vector<std::string> other_entries = {"lattice.side=8", "mcmc.n_samples=78"};
    const ExperimentConfig other = ExperimentConfig::load(std::nullopt, other_entries, 100);
    CHECK(config.config_hash() != other.config_hash());
}

TEST_CASE("auto burn-in and stride scale with the lattice") {
    ExperimentConfig config;
    CHECK(config.burn_in_for(10) == 50000);
    CHECK(config.stride_for(10) == 100);
    CHECK(config.burn_in_for(4) == 8000);
    config.apply("mcmc.burn_in", "123");
    config.apply("mcmc.stride", "7");
    CHECK(config.burn_in_for(10) == 123);
    CHECK(config.stride_for(10) == 7);
}

TEST_CASE("cmd_sample writes one deterministic file per temperature") {
    const fs::path dir = fresh_dir("sample");
    const ExperimentConfig config = micro_config(dir);
    cli::cmd_sample(config);
    for (const double t : {1.0, 5.0, 9.0}) {
        CHECK(fs::exists(cli::sample_path(dir, t)));
    }
    const std::string first = slurp(cli::sample_path(dir, 5.0));
    const io::LoadedSamples loaded = io::read_samples(cli::sample_path(dir, 5.0));
    CHECK(loaded.samples.grids.size() == 40);
    CHECK(loaded.samples.temperature == 5.0);
    CHECK(loaded.seed == config.mcmc_seed + 1);  // chain index derivation

    cli::cmd_sample(config);
    CHECK(slurp(cli::sample_path(dir, 5.0)) == first);
}

TEST_CASE("a single-sample run produces a file with exactly one grid") {
    const fs::path dir = fresh_dir("single");
    ExperimentConfig config = micro_config(dir);
    config.apply("mcmc.temps", "2");
    config.apply("mcmc.n_samples", "1");
    cli::cmd_sample(config);
    CHECK(io::read_samples(cli::sample_path(dir, 2.0)).samples.grids.size() == 1);
}

TEST_CASE("the output directory lock excludes concurrent invocations") {
    const fs::path dir = fresh_dir("lock");
    const ExperimentConfig config = micro_config(dir);
    {
        std::ofstream out(dir / ".lrising.lock");
    }
    CHECK_THROWS_WITH_AS(cli::cmd_sample(config), doctest::Contains("locked"),
                         std::runtime_error);
    fs::remove(dir / ".lrising.lock");
    CHECK_NOTHROW(cli::cmd_sample(config));
    CHECK_FALSE(fs::exists(dir / ".lrising.lock"));  // released on success
}

TEST_CASE("missing artifacts name the command that produces them") {
    const fs::path dir = fresh_dir("missing");
    ExperimentConfig config = micro_config(dir);
    CHECK_THROWS_WITH_AS(cli::cmd_scaling(config), doctest::Contains("`sample`"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(cli::cmd_flow(config), doctest::Contains("`rbm-train`"),
                         std::runtime_error);
    CHECK_THROWS_WITH_AS(cli::cmd_vh(config), doctest::Contains("`sample`"), std::runtime_error);
}

TEST_CASE("the micro pipeline runs end to end deterministically") {
    const fs::path dir = fresh_dir("pipeline");
    ExperimentConfig config = micro_config(dir);
    config.apply("lattice.side", "8");
    config.apply("mcmc.temps", "1,5,7.7,13");
    config.apply("mcmc.n_samples", "30");
    config.apply("rbm.temps", "1,5,7.7,13");
    config.apply("rbm.n_hidden", "16");
    config.apply("rbm.steps", "40");
    config.apply("rbm.batch", "30");
    config.apply("thermometer.temps", "1,5,7.7,13");
    config.apply("thermometer.epochs", "4");
    config.apply("flow.length", "4");
    config.apply("flow.seed_temperature", "1");
    config.apply("rg.steps", "2");
    config.apply("rg.seed_temperature", "7.7");
    config.apply("stack.seed_temperature", "7.7");
    config.apply("stack.n_layers", "2");
    config.apply("stack.steps", "15");
    config.apply("stack.batch", "15");
    config.apply("vh.pgm_top", "2");

    cli::cmd_sample(config);
    cli::cmd_rbm_train(config);
    cli::cmd_thermo(config);
    cli::cmd_flow(config);
    cli::cmd_rg(config);
    cli::cmd_stack(config);
    cli::cmd_vh(config);

    CHECK(fs::exists(cli::rbm_path(dir)));
    CHECK(fs::exists(cli::rbm_trace_path(dir)));
    CHECK(fs::exists(cli::thermometer_path(dir, 8)));
    CHECK(fs::exists(cli::flow_path(dir, 1.0)));
    CHECK(fs::exists(cli::rg_step_path(dir, 1)));
    CHECK(fs::exists(cli::rg_step_path(dir, 2)));
    CHECK(fs::exists(cli::stack_layer_path(dir, 1)));
    CHECK(fs::exists(cli::stack_layer_path(dir, 2)));
    CHECK(fs::exists(cli::vh_matrix_path(dir, "rbm", 1)));
    CHECK(fs::exists(cli::vh_matrix_path(dir, "rg", 2)));
    CHECK(fs::exists(cli::vh_manifest_path(dir)));

    // RG outputs halve the side per step.
    CHECK(io::read_samples(cli::rg_step_path(dir, 1)).samples.geometry.side() == 4);
    CHECK(io::read_samples(cli::rg_step_path(dir, 2)).samples.geometry.side() == 2);

    // Stack shapes follow the quartering chain.
    CHECK(io::read_rbm(cli::stack_layer_path(dir, 1)).n_visible == 64);
    CHECK(io::read_rbm(cli::stack_layer_path(dir, 1)).n_hidden == 16);
    CHECK(io::read_rbm(cli::stack_layer_path(dir, 2)).n_hidden == 4);

    // Flow CSV has one row per step plus comment and header.
    const std::string flow_text = slurp(cli::flow_path(dir, 1.0));
    CHECK(std::count(flow_text.begin(), flow_text.end(), '\n') == 2 + 4);
    CHECK(flow_text.rfind("# config_fnv1a=", 0) == 0);

    // Re-running the stochastic stages reproduces byte-identical artifacts.
    const std::string rbm_bytes = slurp(cli::rbm_path(dir));
    const std::string flow_bytes = slurp(cli::flow_path(dir, 1.0));
    const std::string vh_bytes = slurp(cli::vh_matrix_path(dir, "rbm", 1));
    cli::cmd_rbm_train(config);
    cli::cmd_flow(config);
    cli::cmd_vh(config);
    CHECK(slurp(cli::rbm_path(dir)) == rbm_bytes);
    CHECK(slurp(cli::flow_path(dir, 1.0)) == flow_bytes);
    CHECK(slurp(cli::vh_matrix_path(dir, "rbm", 1)) == vh_bytes);
}

TEST_CASE("cmd_stack refuses an oversized lattice unless acknowledged") {
    const fs::path dir = fresh_dir("stack_guard");
    ExperimentConfig config = micro_config(dir);
    config.apply("lattice.side", "64");
    CHECK_THROWS_WITH_AS(cli::cmd_stack(config), doctest::Contains("desk_scale"),
                         std::invalid_argument);
}
