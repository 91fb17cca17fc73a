#pragma once

#include "kslab/config.hpp"
#include "kslab/simulation.hpp"

#include <filesystem>
#include <string>

namespace kslab {

/// Relative directories resolve against $KSLAB_OUT when it is set, else the working directory.
std::filesystem::path resolve_output_dir(const std::filesystem::path& configured);

/**
 * Runs and writes into `dir`:
 *   config.json               canonical configuration with defaults filled in
 *   series.csv                one row per diagnostics record
 *   snapshots/u_NNNN.ksf      KSFIELD snapshots of u and v
 *   snapshots/v_NNNN.ksf
 *   summary.json              outcome, suprema, window integral, artifact list
 */
RunResult simulate_to_directory(const RunConfig& cfg, const std::filesystem::path& dir);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace kslab
