#pragma once

#include "kslab/config.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace kslab {

enum class ConvergenceKind { space, time };
std::string to_string(ConvergenceKind kind);
ConvergenceKind convergence_kind_from_string(const std::string& name);

struct ConvergenceLevel {
  int n{0};       ///< cells per direction (nr for the disk)
  double dt{0.0};
  double error{0.0};  ///< discrete L2 distance to the reference at T_end
  double wall_seconds{0.0};
};

struct ConvergenceReport {
  ConvergenceKind kind{ConvergenceKind::space};
  std::string reference;  ///< "analytic" or "finest"
  std::vector<ConvergenceLevel> levels;
  std::vector<double> ratios;  ///< error_j / error_{j+1}
  std::vector<double> orders;  ///< log2 of the ratios
  /// Successive-difference estimates log2(|y_j - y_{j+1}| / |y_{j+1} - y_{j+2}|).
  std::vector<double> richardson_orders;

  /// Last Richardson estimate for time studies, last order otherwise.
  std::optional<double> observed_order() const;
  nlohmann::json to_json() const;
};

/**
 * Runs `levels` refinements of `base` with a fixed step per level.
 *  space: n_j = n_0 2^j with dt_j = dt_max 4^{-j}
 *  time:  fixed grid with dt_j = dt_max 2^{-j}
 * The closed-form heat solution is used as reference when the run reduces to the heat
 * equation with cosine data on a rectangle; otherwise the finest level is restricted onto
 * each coarser grid.
 */
ConvergenceReport convergence_study(const RunConfig& base, int levels, ConvergenceKind kind);

/// True when S == 0, there is no source, D is constant, and u0 is a deterministic cosine
/// perturbation on a rectangle.
bool has_heat_reference(const RunConfig& cfg);

/// Closed-form u(t) on `g` for configurations accepted by has_heat_reference.
std::vector<double> heat_reference(const RunConfig& cfg, const Grid& g, double t);

}  // namespace kslab
