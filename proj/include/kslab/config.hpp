#pragma once

#include "kslab/diagnostics.hpp"
#include "kslab/grid.hpp"
#include "kslab/model.hpp"
#include "kslab/stepper.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kslab {

inline constexpr const char* kRunSchema = "kslab.run/v1";

struct GridSpec {
  Geometry geometry{Geometry::rectangle};
  double lx{1.0};
  double ly{1.0};
  int nx{64};
  int ny{64};
  double radius{1.0};
  int nr{64};

  Grid build() const;
};

enum class InitialKind { constant, gaussian_bumps, perturbed_constant };

struct GaussianBump {
  double cx{0.5};
  double cy{0.5};
  double sigma{0.05};
  double weight{1.0};
};

struct CosineMode {
  int m{1};
  int n{0};
};

struct InitialDataSpec {
  InitialKind kind{InitialKind::constant};
  double value{1.0};            ///< constant level; replaced by mass / |Omega| when mass is set
  std::optional<double> mass;   ///< target integral of u0
  std::vector<GaussianBump> bumps;
  double amplitude{0.0};        ///< relative cosine perturbation, in [0, 1)
  std::vector<CosineMode> modes{{1, 0}};
  bool random_coefficients{false};
  bool v0_same{true};           ///< v0 = u0, otherwise the constant v0_value
  double v0_value{0.0};
};

struct OutputSpec {
  std::string dir{"kslab_out"};
  double snapshot_cadence{0.0};  ///< 0 writes only the initial and final snapshots
};

struct RunConfig {
  ModelSpec model;
  GridSpec grid;
  InitialDataSpec initial;
  double t_end{1.0};
  StepOptions step;
  DiagnosticsConfig diagnostics;
  OutputSpec output;
  std::uint64_t seed{0};
  long max_steps{50'000'000};
  int max_retries{20};
  double validation_v_max{50.0};
  int validation_samples{1001};
  std::vector<std::string> warnings;

  /// Source exponent p, or 0 without a source.
  double source_p() const noexcept { return model.source ? model.source->p : 0.0; }
};

/// Parses, fills defaults, and validates. Unknown keys, malformed values and inadmissible
/// models raise ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Reads JSON, reporting syntax errors with line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
nlohmann::json parse_json_text(const std::string& text, const std::string& origin = "<input>");

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const RunConfig& c);

std::string to_string(InitialKind kind);

}  // namespace kslab
