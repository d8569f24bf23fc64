#include "dsuc/lattice_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dsuc {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormat = "dsuc.lattice_function";

std::uint64_t to_little(std::uint64_t x)
{
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return x;
}

fs::path with_suffix(const fs::path& stem, const char* ext)
{
    return fs::path(stem.string() + ext);
}

} // namespace

nlohmann::json lattice_header(const LatticeSpec& spec, ValueEncoding encoding)
{
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = 1;
    j["d"] = spec.dim();
    j["h"] = spec.spacing();
    j["lo"] = spec.lo();
    j["hi"] = spec.hi();
    j["encoding"] = encoding == ValueEncoding::csv ? "csv" : "binary";
    j["value_type"] = "float64";
    j["byte_order"] = "little";
    j["layout"] = "row-major, last index fastest";
    return j;
}

LatticeSpec spec_from_header(const nlohmann::json& j)
{
    if (j.value("format", "") != kFormat) throw std::invalid_argument("not a lattice function header");
    return LatticeSpec(j.at("d").get<int>(), j.at("h").get<double>(), j.at("lo").get<MultiIndex>(),
                       j.at("hi").get<MultiIndex>());
}

void write_lattice_function(const LatticeFunction& f, const fs::path& stem, ValueEncoding encoding)
{
    const LatticeSpec& s = f.spec();
    {
        std::ofstream hdr(with_suffix(stem, ".json"));
        if (!hdr) throw std::runtime_error("cannot write " + with_suffix(stem, ".json").string());
        hdr << lattice_header(s, encoding).dump(2) << '\n';
    }
    if (encoding == ValueEncoding::binary) {
        std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + with_suffix(stem, ".bin").string());
        for (double x : f.values()) {
            const std::uint64_t w = to_little(std::bit_cast<std::uint64_t>(x));
            std::array<char, 8> b;
            std::memcpy(b.data(), &w, 8);
            out.write(b.data(), 8);
        }
        return;
    }
    std::ofstream out(with_suffix(stem, ".csv"));
    if (!out) throw std::runtime_error("cannot write " + with_suffix(stem, ".csv").string());
    for (int j = 0; j < s.dim(); ++j) out << 'n' << (j + 1) << ',';
    out << "value\n";
    char buf[40];
    for_each_site(s, [&](std::size_t k, std::span<const int> n) {
        for (int j = 0; j < s.dim(); ++j) out << n[j] << ',';
        std::snprintf(buf, sizeof buf, "%.17g", f[k]);
        out << buf << '\n';
    });
}

LatticeFunction read_lattice_function(const fs::path& stem)
{
    std::ifstream hdr(with_suffix(stem, ".json"));
    if (!hdr) throw std::runtime_error("cannot read " + with_suffix(stem, ".json").string());
    const auto j = nlohmann::json::parse(hdr);
    LatticeSpec s = spec_from_header(j);
    std::vector<double> v(s.size());
    if (j.at("encoding") == "binary") {
        std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
        if (!in) throw std::runtime_error("cannot read " + with_suffix(stem, ".bin").string());
        for (auto& x : v) {
            std::array<char, 8> b;
            if (!in.read(b.data(), 8)) throw std::runtime_error("truncated binary lattice data");
            std::uint64_t w;
            std::memcpy(&w, b.data(), 8);
            x = std::bit_cast<double>(to_little(w));
        }
        return LatticeFunction(s, std::move(v));
    }
    std::ifstream in(with_suffix(stem, ".csv"));
    if (!in) throw std::runtime_error("cannot read " + with_suffix(stem, ".csv").string());
    std::string line;
    std::getline(in, line);
    std::vector<bool> seen(s.size(), false);
    MultiIndex n(s.dim());
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (int k = 0; k < s.dim(); ++k) {
            if (!std::getline(ls, cell, ',')) throw std::runtime_error("malformed lattice csv row");
            n[k] = std::stoi(cell);
        }
        if (!std::getline(ls, cell, ',')) throw std::runtime_error("malformed lattice csv row");
        if (!s.contains(n)) throw std::runtime_error("csv site outside header box");
        const auto k = s.flat(n);
        if (seen[k]) throw std::runtime_error("duplicate csv site");
        char* end = nullptr;
        v[k] = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0') throw std::runtime_error("malformed lattice csv value");
        seen[k] = true;
        ++rows;
    }
    if (rows != s.size()) throw std::runtime_error("csv row count does not match header box");
    return LatticeFunction(s, std::move(v));
}

} // namespace dsuc
