#pragma once

#include <string>

#include <json.hpp>

namespace ergolab::io {

// 17 significant digits: doubles round-trip losslessly through the CSV.
std::string g17(double v);

// Writes via a temp file + rename so failed runs never leave partial output.
void atomic_write_file(const std::string& path, const std::string& content);

// Standard header lines embedded in every emitted CSV: version + echoed config.
std::string csv_preamble(const nlohmann::json& config);

// Standard JSON envelope: {"version":..., "config":..., "data":...}.
nlohmann::json envelope(const nlohmann::json& config, nlohmann::json data);

}  // namespace ergolab::io
