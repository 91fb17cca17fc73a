#pragma once

#include "kslab/grid.hpp"
#include "kslab/model.hpp"
#include "kslab/stepper.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kslab {

struct DiagnosticsConfig {
  double k{1.0};                         ///< log exponent of the energy functional
  std::vector<double> q_list{2.0, 4.0, 8.0};
  double tau{0.0};                       ///< dissipation window; 0 means min(1, T_end / 2)
  double cadence{0.0};                   ///< time between records; 0 means T_end / 200
  double blowup_max_u{1e6};
  double blowup_dt_floor{1e-12};

  void validate() const;
  /// Warnings for k outside (p, 2-p) (nondegenerate) or (1+p, 2-p) (degenerate).
  std::vector<std::string> admissibility_warnings(Regime regime, double p) const;
};

/// Default energy exponent: 1 for nondegenerate runs, 3/2 (midpoint of (1+p, 2-p)) otherwise.
double default_energy_exponent(Regime regime);

struct DiagnosticsRecord {
  double t{0.0};
  double mass{0.0};
  double energy_y{0.0};
  double sup_u{0.0};
  double sup_v{0.0};
  double grad_v_sq{0.0};
  double lap_v_sq{0.0};
  double dissipation_density{0.0};
  std::vector<double> lq_norms;
  double clamped_mass{0.0};
  bool blowup{false};
};

/// integral of u ln^k(u+e) + 1/2 integral |grad v|^2.
double energy_y(const State& s, double k);

/// integral of u^2 ln^{k-p}(u+e).
double dissipation_density(const Field& u, const Grid& g, double k, double p);

/// ||u||_{L^q}, evaluated as sup * (integral (u/sup)^q)^{1/q}.
double lq_norm(const Field& u, const Grid& g, double q);

/// All functionals at the current state. `p` is the source exponent (0 without a source).
DiagnosticsRecord measure(const State& s, const DiagnosticsConfig& d, double p);

/// Supremum over window starts of the trapezoid integral of
/// (dissipation_density + lap_v_sq) over [t, t + tau]. Window ends falling between records
/// are linearly interpolated. Throws WindowTooShort when the series spans less than tau.
double dissipation_window(std::span<const DiagnosticsRecord> series, double tau);

struct LadderRung {
  double q{0.0};
  double norm{0.0};        ///< ||u||_q
  double normalized{0.0};  ///< ||u||_q / |Omega|^{1/q}
};

struct MoserLadder {
  std::vector<LadderRung> rungs;
  double sup{0.0};
};

/// Norms at q = q0 * 2^j, j = 0..levels. Throws PreconditionError for q0 <= 2 or negative u,
/// and Error if the normalized norms fail to be nondecreasing.
MoserLadder moser_ladder(const Field& u, const Grid& g, double q0, int levels);

enum class BlowupReason { none, threshold, nonfinite, dt_collapse };
std::string to_string(BlowupReason reason);

struct BlowupCheck {
  bool flagged{false};
  BlowupReason reason{BlowupReason::none};
};

BlowupCheck detect_blowup(const State& s, const DiagnosticsConfig& d, double last_dt);

std::string csv_header(const std::vector<double>& q_list);
std::string csv_row(const DiagnosticsRecord& r);

}  // namespace kslab
