#pragma once

#include "dsuc/lattice.hpp"

#include <filesystem>
#include "json.hpp"

namespace dsuc {

enum class ValueEncoding { csv, binary };

// Writes <stem>.json (box header) and <stem>.csv or <stem>.bin (values).
// Binary values are little-endian float64 in storage order.
void write_lattice_function(const LatticeFunction& f, const std::filesystem::path& stem,
                            ValueEncoding encoding);
LatticeFunction read_lattice_function(const std::filesystem::path& stem);

nlohmann::json lattice_header(const LatticeSpec& spec, ValueEncoding encoding);
LatticeSpec spec_from_header(const nlohmann::json& header);

} // namespace dsuc
