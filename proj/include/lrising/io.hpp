#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "lrising/mcmc.hpp"
#include "lrising/rbm.hpp"
#include "lrising/thermometer.hpp"

namespace lrising::io {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);

/// Sample file ("SPNL"): version u16 = 1, then little-endian u32 L,
/// u32 count, f64 temperature, f64 alpha, u64 seed, followed by
/// count * L * L bytes row-major, 0x00 = -1 and 0x01 = +1.
void write_samples(const std::filesystem::path& path, const SampleSet& samples,
                   std::uint64_t seed);
struct LoadedSamples {
    SampleSet samples;
    std::uint64_t seed = 0;
};
LoadedSamples read_samples(const std::filesystem::path& path);

/// RBM parameter file ("RBMW"): version u16 = 1, u32 n_visible, u32 n_hidden,
/// then f64 W row-major, b_v, b_h.
void write_rbm(const std::filesystem::path& path, const RbmParams& params);
RbmParams read_rbm(const std::filesystem::path& path);

/// Thermometer file ("THRM"): version u16 = 1, u32 input_dim, u32 hidden
/// width, u32 n_classes, then f64 class temperatures, W1 row-major, b1,
/// W2 row-major, b2 (layer order).
void write_thermometer(const std::filesystem::path& path, const ThermometerModel& model);
ThermometerModel read_thermometer(const std::filesystem::path& path);

/// CSV with one leading comment line (config hash + seed) and a header row.
/// Numeric cells use format_double.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& comment,
              std::span<const std::string> columns);
    void row(std::span<const double> values);
    void row(std::span<const std::string> cells);

private:
    std::ofstream out_;
    std::size_t n_columns_;
};

/// 8-bit PGM (P5). Values are linearly rescaled from [-1, 1] to [0, 255]
/// and rounded; out-of-range inputs clamp.
void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const double> values);

/// FNV-1a over a canonical text; used to stamp outputs with their config.
std::uint64_t fnv1a(const std::string& text);

}  // namespace lrising::io
