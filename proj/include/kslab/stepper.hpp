#pragma once

#include "kslab/grid.hpp"
#include "kslab/model.hpp"

#include <string>

namespace kslab {

enum class SourceTreatment { explicit_euler, patankar };
std::string to_string(SourceTreatment treatment);
SourceTreatment source_treatment_from_string(const std::string& name);

struct StepOptions {
  double cfl_safety{0.25};
  double dt_min{1e-10};
  double dt_max{1e-2};
  double linear_tol{1e-10};
  int max_linear_iters{20000};
  ChemotaxisScheme scheme{ChemotaxisScheme::upwind};
  SourceTreatment source{SourceTreatment::patankar};

  /// Throws PreconditionError when an invariant is broken.
  void validate() const;
};

/// Density u and concentration v on a common grid, plus the clock.
struct State {
  Grid grid;
  Field u;
  Field v;
  double t{0.0};
  long step_count{0};
  double last_dt{0.0};
  /// Mass removed by clamping rounding-level negatives, accumulated over the run.
  double clamped_mass{0.0};

  State(Grid g, Field u0, Field v0, double t0 = 0.0);
};

/// Absolute clamp tolerance for stage values below zero.
inline constexpr double kClampTolerance = 1e-12;

/**
 * One first-order IMEX step.
 *
 *  v stage:  (1 + dt) v' - dt Lap v' = v + dt u                       (implicit)
 *  u stage:  u' - dt div(D(v') grad u') + dt d(u) u' = u - dt div(u S(v') grad v') + dt g(u)
 *
 * Chemotaxis is explicit with velocities from v'. With the Patankar treatment g is the
 * production r_+ u and d the destruction rate mu u / ln^p(u+e) + r_-; with the explicit
 * treatment g = f and d = 0.
 *
 * Throws PositivityFailure when the explicit u stage falls below -1e-12 (the caller retries
 * with a smaller dt) and SolverStall when the linear solver gives up.
 */
State step(const State& s, const ModelSpec& m, double dt, const StepOptions& o);

/// Transport-limited step cfl_safety * min_f h_f / |w_f|, capped by the explicit source
/// stiffness 0.5 / |f'(max u)| when the source is explicit, clamped to [dt_min, dt_max].
double adapt_dt(const State& s, const ModelSpec& m, const StepOptions& o);

}  // namespace kslab
