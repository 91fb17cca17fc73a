#pragma once

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/stepper.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace kslab {

enum class Outcome { completed, blowup, stalled };
std::string to_string(Outcome outcome);

enum class StallReason { none, dt_below_min, positivity, max_steps, solver_stall, invalid_coefficient };
std::string to_string(StallReason reason);

/// Running suprema of the recorded functionals. sup_u and sup_v also cover every accepted step.
struct RunSuprema {
  double sup_u{0.0};
  double sup_v{0.0};
  double energy_y{0.0};
  double grad_v_sq{0.0};
  double lap_v_sq{0.0};
  double dissipation_density{0.0};
  std::vector<double> lq_norms;

  void update(const DiagnosticsRecord& r);
};

struct RunResult {
  Outcome outcome{Outcome::completed};
  BlowupReason blowup_reason{BlowupReason::none};
  StallReason stall_reason{StallReason::none};
  std::string detail;
  double t_final{0.0};
  std::optional<double> t_star;
  long steps{0};
  long rejected_steps{0};
  double initial_mass{0.0};
  double final_mass{0.0};
  double clamped_mass{0.0};
  RunSuprema sup;
  std::optional<double> dissipation_window;
  double wall_seconds{0.0};
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;
  std::vector<DiagnosticsRecord> series;
  std::optional<State> final_state;

  nlohmann::json summary() const;
};

/// Hooks invoked during a run.
class RunObserver {
public:
  virtual ~RunObserver() = default;
  virtual void on_record(const DiagnosticsRecord&) {}
  /// Initial state, every snapshot_cadence of simulated time, and the final state.
  virtual void on_snapshot(const State&) {}
};

/**
 * Integrates from the configured initial data to T_end, or until blow-up or a stall.
 * A step rejected for positivity is retried with half the step, at most max_retries times.
 * Records are taken at t = 0, then every `cadence`, and at the final time.
 */
RunResult run(const RunConfig& cfg, RunObserver* observer = nullptr);

/// Same, starting from the given state instead of the configured initial data.
RunResult run_from(const RunConfig& cfg, State initial, RunObserver* observer = nullptr);

}  // namespace kslab
