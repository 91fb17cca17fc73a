#pragma once

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kslab {

inline constexpr const char* kSweepSchema = "kslab.sweep/v1";

/// One swept parameter: a dotted config path ("model.source.p") or an alias
/// (p, mu, r, mass, k, T_end, geometry, n), and the values it takes.
struct SweepAxis {
  std::string name;
  std::vector<nlohmann::json> values;
};

struct SweepPlan {
  nlohmann::json base;
  std::vector<SweepAxis> axes;
  int parallelism{1};
  std::size_t max_runs{1000};
  std::string out_dir{"kslab_sweep"};

  std::size_t size() const;
};

/// Relative "base_config" paths resolve against `origin`.
SweepPlan parse_sweep_plan(const nlohmann::json& j, const std::filesystem::path& origin = {});
SweepPlan load_sweep_plan(const std::filesystem::path& path);

/// Run configuration for the point with the given per-axis value indices.
nlohmann::json apply_axes(const nlohmann::json& base, const std::vector<SweepAxis>& axes,
                          const std::vector<std::size_t>& choice);

struct SweepRow {
  std::size_t index{0};
  nlohmann::json parameters;
  std::string outcome;  ///< completed, blowup, stalled or error
  std::string reason;
  double t_final{0.0};
  std::optional<double> t_star;
  long steps{0};
  double sup_u{0.0};
  double sup_v{0.0};
  double sup_energy{0.0};
  std::optional<double> dissipation_window;
  double wall_seconds{0.0};
  std::string directory;
  std::string error;
};

struct SweepTable {
  std::vector<std::string> axis_names;
  std::vector<SweepRow> rows;

  std::string csv_header() const;
  std::string csv_row(const SweepRow& r) const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Runs every point, at most `parallelism` at a time, each in out/run_NNNN. Rows are appended
/// to out/sweep_partial.csv as runs finish; out/sweep.csv and out/sweep.json hold the
/// final table in index order. A failing point becomes an error row.
SweepTable run_sweep(const SweepPlan& plan, const std::filesystem::path& out);

}  // namespace kslab
