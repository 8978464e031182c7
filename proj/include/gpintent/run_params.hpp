#pragma once

#include <filesystem>
#include <string>

#include "gpintent/simulator.hpp"

namespace gpintent {

/// Reads strategy and robot settings from a JSON object. Recognized keys:
/// r, alpha, window_s, horizon_pct, safe_from_nn_point, r2_to_predicted_point,
/// v_free, v_interior, timeout, first_detection. Missing keys keep the
/// defaults; unknown keys and out-of-range values throw InvalidArgument.
SimConfig parse_sim_config(const std::string& json_text);
SimConfig load_sim_config(const std::filesystem::path& path);

/// Canonical JSON of the same keys (sorted, shortest round-trip numbers).
std::string sim_config_to_json(const SimConfig& cfg);

} // namespace gpintent
