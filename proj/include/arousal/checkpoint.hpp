#pragma once

#include "arousal/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace arousal {

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Checkpoint layout: one line of JSON (network config, layer names and
/// shapes, run config and its hash), a newline, then every parameter value
/// as little-endian float64 in layer order.
void save_checkpoint(const std::filesystem::path& path, ArousalNet<double>& net,
                     const nlohmann::json& run_config = nlohmann::json::object());

struct LoadedCheckpoint {
  ArousalNet<double> net;
  nlohmann::json run_config;
};

/// Throws LoadError on a missing file, malformed header, layout mismatch or
/// truncated payload.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const NetConfig& cfg);
NetConfig net_config_from_json(const nlohmann::json& j);

}  // namespace arousal
