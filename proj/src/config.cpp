#include "lrising/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "lrising/io.hpp"

namespace lrising {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
    throw std::invalid_argument("config key '" + key + "': bad value '" + value + "' (" + why + ")");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
    } catch (...) {
        bad_value(key, value, "expected a finite number");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        bad_value(key, value, "expected an integer");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        bad_value(key, value, "expected a non-negative integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value, "expected true|false");
}

// Decimal string -> (scaled integer, number of fraction digits).
struct ScaledDecimal {
    std::int64_t mantissa = 0;
    int fraction_digits = 0;
};

ScaledDecimal parse_decimal(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty number in temperature grid");
    bool negative = false;
    std::size_t k = 0;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        k = 1;
    }
    ScaledDecimal out;
    bool seen_digit = false, seen_dot = false;
    for (; k < s.size(); ++k) {
        if (s[k] == '.') {
            if (seen_dot) throw std::invalid_argument("malformed number '" + text + "'");
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(s[k]))) {
            seen_digit = true;
            out.mantissa = out.mantissa * 10 + (s[k] - '0');
            if (seen_dot) ++out.fraction_digits;
            if (out.fraction_digits > 9 || out.mantissa > (std::int64_t{1} << 52)) {
                throw std::invalid_argument("number '" + text + "' too precise for a grid spec");
            }
        } else {
            throw std::invalid_argument("malformed number '" + text + "'");
        }
    }
    if (!seen_digit) throw std::invalid_argument("malformed number '" + text + "'");
    if (negative) out.mantissa = -out.mantissa;
    return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream stream(text);
    while (std::getline(stream, item, sep)) parts.push_back(item);
    return parts;
}

}  // namespace

std::vector<double> parse_temperature_grid(const std::string& text) {
    const std::string s = trim(text);
    if (s.find(':') != std::string::npos) {
        const std::vector<std::string> parts = split(s, ':');
        if (parts.size() != 3) throw std::invalid_argument("grid spec must be start:step:stop");
        ScaledDecimal start = parse_decimal(parts[0]);
        ScaledDecimal step = parse_decimal(parts[1]);
        ScaledDecimal stop = parse_decimal(parts[2]);
        const int digits = std::max({start.fraction_digits, step.fraction_digits, stop.fraction_digits});
        std::int64_t denom = 1;
        for (int d = 0; d < digits; ++d) denom *= 10;
        auto rescale = [&](const ScaledDecimal& x) {
            std::int64_t m = x.mantissa;
            for (int d = x.fraction_digits; d < digits; ++d) m *= 10;
            return m;
        };
        const std::int64_t a = rescale(start), h = rescale(step), b = rescale(stop);
        if (h <= 0) throw std::invalid_argument("grid step must be positive");
        std::vector<double> temps;
        for (std::int64_t t = a; t <= b; t += h) {
            temps.push_back(static_cast<double>(t) / static_cast<double>(denom));
        }
        if (temps.empty()) throw std::invalid_argument("empty temperature grid");
        return temps;
    }
    std::vector<double> temps;
    for (const std::string& part : split(s, ',')) {
        temps.push_back(parse_double("temps", trim(part)));
    }
    if (temps.empty()) throw std::invalid_argument("empty temperature grid");
    std::vector<double> sorted = temps;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("duplicate temperatures in grid");
    }
    return temps;
}

ExperimentConfig::ExperimentConfig() {
    for (const auto& key : known_keys()) raw_[key];  // create empty slots
    // Fill in the defaults as canonical strings.
    raw_["lattice.side"] = "10";
    raw_["lattice.alpha"] = "3";
    raw_["lattice.mu"] = "0";
    raw_["mcmc.temps"] = "0:0.1:14";
    raw_["mcmc.burn_in"] = "auto";
    raw_["mcmc.stride"] = "auto";
    raw_["mcmc.n_samples"] = "2000";
    raw_["mcmc.seed"] = "1";
    raw_["rbm.n_hidden"] = "81";
    raw_["rbm.temps"] = "0:0.5:14";
    raw_["rbm.steps"] = "30000";
    raw_["rbm.learning_rate"] = "0.001";
    raw_["rbm.batch"] = "1000";
    raw_["rbm.cd_k"] = "1";
    raw_["rbm.data_hidden"] = "sampled";
    raw_["rbm.seed"] = "2";
    raw_["flow.length"] = "50";
    raw_["flow.seed_temperature"] = "0";
    raw_["flow.seed"] = "3";
    raw_["rg.steps"] = "3";
    raw_["rg.seed_temperature"] = "7.7";
    raw_["rg.seed"] = "4";
    raw_["stack.n_layers"] = "3";
    raw_["stack.steps"] = "400";
    raw_["stack.learning_rate"] = "0.001";
    raw_["stack.batch"] = "200";
    raw_["stack.cd_k"] = "1";
    raw_["stack.seed_temperature"] = "7.7";
    raw_["stack.desk_scale"] = "true";
    raw_["stack.seed"] = "5";
    raw_["thermometer.temps"] = "0:0.5:14";
    raw_["thermometer.width"] = "64";
    raw_["thermometer.epochs"] = "50";
    raw_["thermometer.learning_rate"] = "0.001";
    raw_["thermometer.batch"] = "100";
    raw_["thermometer.holdout"] = "0.1";
    raw_["thermometer.symmetrize"] = "true";
    raw_["thermometer.seed"] = "6";
    raw_["vh.source"] = "both";
    raw_["vh.pgm_top"] = "8";
    raw_["vh.seed"] = "7";
    raw_["output.dir"] = "";
    for (const auto& [key, value] : raw_) apply(key, value);
}

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
    auto int_in = [&](std::int64_t lo, std::int64_t hi) {
        const std::int64_t v = parse_int(key, value);
        if (v < lo || v > hi) bad_value(key, value, "out of range");
        return v;
    };
    auto positive_real = [&] {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) bad_value(key, value, "must be positive");
        return v;
    };
    auto nonnegative_real = [&] {
        const double v = parse_double(key, value);
        if (!(v >= 0.0)) bad_value(key, value, "must be >= 0");
        return v;
    };
    auto auto_or_u64 = [&] { return value == "auto" ? kAuto : parse_u64(key, value); };

    if (key == "lattice.side") lattice_side = static_cast<int>(int_in(2, 4096));
    else if (key == "lattice.alpha") lattice_alpha = positive_real();
    else if (key == "lattice.mu") lattice_mu = parse_double(key, value);
    else if (key == "mcmc.temps") mcmc_temps = parse_temperature_grid(value);
    else if (key == "mcmc.burn_in") mcmc_burn_in = auto_or_u64();
    else if (key == "mcmc.stride") mcmc_stride = auto_or_u64();
    else if (key == "mcmc.n_samples") mcmc_n_samples = static_cast<std::uint64_t>(int_in(1, 1'000'000));
    else if (key == "mcmc.seed") mcmc_seed = parse_u64(key, value);
    else if (key == "rbm.n_hidden") rbm_n_hidden = static_cast<int>(int_in(1, 1 << 20));
    else if (key == "rbm.temps") rbm_temps = parse_temperature_grid(value);
    else if (key == "rbm.steps") rbm_steps = int_in(1, 100'000'000);
    else if (key == "rbm.learning_rate") rbm_learning_rate = nonnegative_real();
    else if (key == "rbm.batch") rbm_batch = int_in(1, 10'000'000);
    else if (key == "rbm.cd_k") rbm_cd_k = static_cast<int>(int_in(1, 1000));
    else if (key == "rbm.data_hidden") {
        if (value == "sampled") rbm_data_hidden_mean_field = false;
        else if (value == "meanfield") rbm_data_hidden_mean_field = true;
        else bad_value(key, value, "expected sampled|meanfield");
    }
    else if (key == "rbm.seed") rbm_seed = parse_u64(key, value);
    else if (key == "flow.length") flow_length = static_cast<int>(int_in(1, 100'000));
    else if (key == "flow.seed_temperature") flow_seed_temperature = nonnegative_real();
    else if (key == "flow.seed") flow_seed = parse_u64(key, value);
    else if (key == "rg.steps") rg_steps = static_cast<int>(int_in(1, 16));
    else if (key == "rg.seed_temperature") rg_seed_temperature = parse_double(key, value);
    else if (key == "rg.seed") rg_seed = parse_u64(key, value);
    else if (key == "stack.n_layers") stack_n_layers = static_cast<int>(int_in(1, 8));
    else if (key == "stack.steps") stack_steps = int_in(1, 100'000'000);
    else if (key == "stack.learning_rate") stack_learning_rate = nonnegative_real();
    else if (key == "stack.batch") stack_batch = int_in(1, 10'000'000);
    else if (key == "stack.cd_k") stack_cd_k = static_cast<int>(int_in(1, 1000));
    else if (key == "stack.seed_temperature") stack_seed_temperature = parse_double(key, value);
    else if (key == "stack.desk_scale") stack_desk_scale = parse_bool(key, value);
    else if (key == "stack.seed") stack_seed = parse_u64(key, value);
    else if (key == "thermometer.temps") thermometer_temps = parse_temperature_grid(value);
    else if (key == "thermometer.width") thermometer_width = static_cast<int>(int_in(1, 65536));
    else if (key == "thermometer.epochs") thermometer_epochs = static_cast<int>(int_in(0, 1'000'000));
    else if (key == "thermometer.learning_rate") thermometer_learning_rate = nonnegative_real();
    else if (key == "thermometer.batch") thermometer_batch = int_in(1, 10'000'000);
    else if (key == "thermometer.holdout") {
        thermometer_holdout = parse_double(key, value);
        if (!(thermometer_holdout >= 0.0 && thermometer_holdout < 1.0)) {
            bad_value(key, value, "must be in [0, 1)");
        }
    }
    else if (key == "thermometer.symmetrize") thermometer_symmetrize = parse_bool(key, value);
    else if (key == "thermometer.seed") thermometer_seed = parse_u64(key, value);
    else if (key == "vh.source") {
        if (value != "both" && value != "rbm" && value != "rg") bad_value(key, value, "expected both|rbm|rg");
        vh_source = value;
    }
    else if (key == "vh.pgm_top") vh_pgm_top = static_cast<int>(int_in(0, 1 << 20));
    else if (key == "vh.seed") vh_seed = parse_u64(key, value);
    else if (key == "output.dir") output_dir = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");

    raw_[key] = value;
}

ExperimentConfig ExperimentConfig::load(const std::optional<std::filesystem::path>& file,
                                        std::span<const std::string> overrides,
                                        std::optional<std::uint64_t> global_seed) {
    ExperimentConfig config;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw std::runtime_error("cannot open config file " + file->string());
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw std::invalid_argument(file->string() + ":" + std::to_string(line_no) +
                                            ": expected 'section.key = value'");
            }
            config.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    for (const std::string& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("override '" + entry + "' is not of the form key=value");
        }
        config.apply(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
    }
    if (global_seed) {
        const std::pair<const char*, int> sections[] = {
            {"mcmc.seed", 0}, {"rbm.seed", 1},   {"flow.seed", 2},        {"rg.seed", 3},
            {"stack.seed", 4}, {"thermometer.seed", 5}, {"vh.seed", 6},
        };
        for (const auto& [key, index] : sections) {
            config.apply(key, std::to_string(*global_seed + static_cast<std::uint64_t>(index)));
        }
    }
    return config;
}

std::vector<std::string> ExperimentConfig::known_keys() {
    return {
        "lattice.side",       "lattice.alpha",          "lattice.mu",
        "mcmc.temps",         "mcmc.burn_in",           "mcmc.stride",
        "mcmc.n_samples",     "mcmc.seed",              "rbm.n_hidden",
        "rbm.temps",          "rbm.steps",              "rbm.learning_rate",
        "rbm.batch",          "rbm.cd_k",               "rbm.data_hidden",
        "rbm.seed",           "flow.length",            "flow.seed_temperature",
        "flow.seed",          "rg.steps",               "rg.seed_temperature",
        "rg.seed",            "stack.n_layers",         "stack.steps",
        "stack.learning_rate", "stack.batch",           "stack.cd_k",
        "stack.seed_temperature", "stack.desk_scale",   "stack.seed",
        "thermometer.temps",  "thermometer.width",      "thermometer.epochs",
        "thermometer.learning_rate", "thermometer.batch", "thermometer.holdout",
        "thermometer.symmetrize", "thermometer.seed",   "vh.source",  "vh.pgm_top",
        "vh.seed",            "output.dir",
    };
}

std::string ExperimentConfig::canonical_text() const {
    std::string text;
    for (const auto& [key, value] : raw_) {
        text += key;
        text += '=';
        text += value;
        text += '\n';
    }
    return text;
}

std::uint64_t ExperimentConfig::config_hash() const { return io::fnv1a(canonical_text()); }

std::uint64_t ExperimentConfig::burn_in_for(int side) const {
    if (mcmc_burn_in != kAuto) return mcmc_burn_in;
    return 500ull * static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side);
}

std::uint64_t ExperimentConfig::stride_for(int side) const {
    if (mcmc_stride != kAuto) return mcmc_stride;
    return static_cast<std::uint64_t>(side) * static_cast<std::uint64_t>(side);
}

}  // namespace lrising
