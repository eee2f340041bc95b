#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "binls/model.hpp"

namespace binls {

// 17 significant digits, '.' decimal point, locale-independent.
std::string format_g17(double x);

// Write-to-temp then rename, so readers never observe partial files.
void atomic_write_text(const std::filesystem::path& path, const std::string& text);
void atomic_write_bytes(const std::filesystem::path& path, const void* data,
                        std::size_t bytes);

// Field dump: <base>.json header {dimension, points_per_axis, box_length,
// dtype:"f64-le"} plus <base>.bin raw little-endian doubles, row-major.
void write_field_dump(const std::filesystem::path& base, const RealField& f);
RealField read_field_dump(const std::filesystem::path& base);

// StatePair: two field dumps (<base>.u, <base>.v) plus <base>.manifest.json
// holding {params, total_mass, energy_I, lambda_estimate}.
void write_state_pair(const std::filesystem::path& base, const StatePair& p,
                      const SystemParams& params);
struct LoadedState {
    StatePair state;
    SystemParams params;
};
LoadedState read_state_pair(const std::filesystem::path& base);

nlohmann::json params_to_json(const SystemParams& params);
SystemParams params_from_json(const nlohmann::json& j);
nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

}  // namespace binls
