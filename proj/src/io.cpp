#include "lrising/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace lrising::io {

namespace {

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    put_bytes(out, b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void get_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) {
        throw std::runtime_error(std::string("truncated file while reading ") + what);
    }
}

std::uint16_t get_u16(std::istream& in, const char* what) {
    unsigned char b[2];
    get_bytes(in, b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    get_bytes(in, b, 4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    unsigned char b[8];
    get_bytes(in, b, 8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in, const char* what) {
    return std::bit_cast<double>(get_u64(in, what));
}

void check_magic(std::istream& in, const char expected[4], const char* what) {
    char magic[4];
    get_bytes(in, magic, 4, what);
    if (std::memcmp(magic, expected, 4) != 0) {
        throw std::runtime_error(std::string("bad magic bytes in ") + what + " file");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
    return in;
}

void put_f64_array(std::ostream& out, std::span<const double> values) {
    for (const double v : values) put_f64(out, v);
}

void get_f64_array(std::istream& in, std::span<double> values, const char* what) {
    for (double& v : values) v = get_f64(in, what);
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_samples(const std::filesystem::path& path, const SampleSet& samples,
                   std::uint64_t seed) {
    std::ofstream out = open_out(path);
    const int side = samples.geometry.side();
    put_bytes(out, "SPNL", 4);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(side));
    put_u32(out, static_cast<std::uint32_t>(samples.grids.size()));
    put_f64(out, samples.temperature);
    put_f64(out, samples.geometry.alpha());
    put_u64(out, seed);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(side) * side);
    for (const auto& grid : samples.grids) {
        if (grid.side() != side) throw std::invalid_argument("mixed grid sizes in sample set");
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            bytes[i] = grid.values()[i] > 0 ? 0x01 : 0x00;
        }
        put_bytes(out, bytes.data(), bytes.size());
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

LoadedSamples read_samples(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    check_magic(in, "SPNL", "sample");
    const std::uint16_t version = get_u16(in, "sample version");
    if (version != 1) throw std::runtime_error("unsupported sample file version");
    const auto side = static_cast<int>(get_u32(in, "sample side"));
    const std::uint32_t count = get_u32(in, "sample count");
    const double temperature = get_f64(in, "sample temperature");
    const double alpha = get_f64(in, "sample alpha");
    const std::uint64_t seed = get_u64(in, "sample seed");

    LoadedSamples loaded{SampleSet{LatticeGeometry(side, alpha), temperature, {}}, seed};
    loaded.samples.grids.reserve(count);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(side) * side);
    for (std::uint32_t k = 0; k < count; ++k) {
        get_bytes(in, bytes.data(), bytes.size(), "sample grid");
        SpinGrid grid(side);
        for (std::size_t i = 0; i < bytes.size(); ++i) {
            if (bytes[i] > 1) throw std::runtime_error("corrupt spin byte in sample file");
            grid.set_spin(static_cast<int>(i), bytes[i] ? std::int8_t{+1} : std::int8_t{-1});
        }
        loaded.samples.grids.push_back(std::move(grid));
    }
    return loaded;
}

void write_rbm(const std::filesystem::path& path, const RbmParams& params) {
    std::ofstream out = open_out(path);
    put_bytes(out, "RBMW", 4);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(params.n_visible));
    put_u32(out, static_cast<std::uint32_t>(params.n_hidden));
    put_f64_array(out, params.weights);
    put_f64_array(out, params.visible_bias);
    put_f64_array(out, params.hidden_bias);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

RbmParams read_rbm(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    check_magic(in, "RBMW", "RBM");
    if (get_u16(in, "RBM version") != 1) throw std::runtime_error("unsupported RBM file version");
    const auto nv = static_cast<int>(get_u32(in, "n_visible"));
    const auto nh = static_cast<int>(get_u32(in, "n_hidden"));
    if (nv < 1 || nh < 1) throw std::runtime_error("corrupt RBM dimensions");
    RbmParams params = RbmParams::zeros(nv, nh);
    get_f64_array(in, params.weights, "weights");
    get_f64_array(in, params.visible_bias, "visible bias");
    get_f64_array(in, params.hidden_bias, "hidden bias");
    return params;
}

void write_thermometer(const std::filesystem::path& path, const ThermometerModel& model) {
    std::ofstream out = open_out(path);
    put_bytes(out, "THRM", 4);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(model.input_dim));
    put_u32(out, static_cast<std::uint32_t>(model.hidden_width));
    put_u32(out, static_cast<std::uint32_t>(model.n_classes()));
    put_f64_array(out, model.class_temperatures);
    put_f64_array(out, model.w1);
    put_f64_array(out, model.b1);
    put_f64_array(out, model.w2);
    put_f64_array(out, model.b2);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

ThermometerModel read_thermometer(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    check_magic(in, "THRM", "thermometer");
    if (get_u16(in, "thermometer version") != 1) {
        throw std::runtime_error("unsupported thermometer file version");
    }
    ThermometerModel model;
    model.input_dim = static_cast<int>(get_u32(in, "input_dim"));
    model.hidden_width = static_cast<int>(get_u32(in, "hidden_width"));
    const auto n_classes = static_cast<int>(get_u32(in, "n_classes"));
    if (model.input_dim < 1 || model.hidden_width < 1 || n_classes < 1) {
        throw std::runtime_error("corrupt thermometer dimensions");
    }
    model.class_temperatures.resize(static_cast<std::size_t>(n_classes));
    model.w1.resize(static_cast<std::size_t>(model.hidden_width) * model.input_dim);
    model.b1.resize(static_cast<std::size_t>(model.hidden_width));
    model.w2.resize(static_cast<std::size_t>(n_classes) * model.hidden_width);
    model.b2.resize(static_cast<std::size_t>(n_classes));
    get_f64_array(in, model.class_temperatures, "class temperatures");
    get_f64_array(in, model.w1, "w1");
    get_f64_array(in, model.b1, "b1");
    get_f64_array(in, model.w2, "w2");
    get_f64_array(in, model.b2, "b2");
    return model;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& comment,
                     std::span<const std::string> columns)
    : out_(path, std::ios::binary | std::ios::trunc), n_columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << "# " << comment << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << columns[i] << (i + 1 < columns.size() ? "," : "");
    }
    out_ << "\n";
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != n_columns_) throw std::invalid_argument("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "");
    }
    out_ << "\n";
    if (!out_) throw std::runtime_error("CSV write failed");
}

void CsvWriter::row(std::span<const std::string> cells) {
    if (cells.size() != n_columns_) throw std::invalid_argument("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
    }
    out_ << "\n";
    if (!out_) throw std::runtime_error("CSV write failed");
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               std::span<const double> values) {
    if (static_cast<std::size_t>(width) * height != values.size()) {
        throw std::invalid_argument("PGM dimensions do not match the value count");
    }
    std::ofstream out = open_out(path);
    out << "P5\n" << width << " " << height << "\n255\n";
    for (const double v : values) {
        const double scaled = std::round((v + 1.0) * 127.5);
        const auto byte = static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
        out.put(static_cast<char>(byte));
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace lrising::io
