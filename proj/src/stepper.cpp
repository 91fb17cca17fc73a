#include "kslab/stepper.hpp"

#include "kslab/error.hpp"
#include "kslab/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace kslab {

std::string to_string(SourceTreatment treatment) {
  return treatment == SourceTreatment::patankar ? "patankar" : "explicit";
}

SourceTreatment source_treatment_from_string(const std::string& name) {
  if (name == "patankar") return SourceTreatment::patankar;
  if (name == "explicit") return SourceTreatment::explicit_euler;
  throw PreconditionError("unknown source treatment '" + name + "'");
}

void StepOptions::validate() const {
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw PreconditionError("cfl_safety must lie in (0, 1]");
  if (!(dt_min > 0.0) || !(dt_min <= dt_max)) throw PreconditionError("need 0 < dt_min <= dt_max");
  if (!(linear_tol > 0.0)) throw PreconditionError("linear_tol must be positive");
  if (max_linear_iters <= 0) throw PreconditionError("max_linear_iters must be positive");
}

State::State(Grid g, Field u0, Field v0, double t0)
    : grid(std::move(g)), u(std::move(u0)), v(std::move(v0)), t(t0) {
  require_on_grid(u, grid, "State");
  require_on_grid(v, grid, "State");
}

namespace {

// CG leaves O(tol * max|x|) absolute error, which may dip below zero where the exact
// solution of the M-matrix system is tiny but positive. Such values are clamped; anything
// deeper is a genuine failure. The clamped solution is then rescaled so that the weighted
// balance sum V(1+alpha) x = sum V rhs holds exactly, as it does for the exact solution.
double clamp_and_balance(std::span<double> x, std::span<const double> rhs,
                         std::span<const double> alpha, const Grid& g, double linear_tol,
                         const char* stage) {
  const auto vol = g.volumes();
  double xmax = 0.0;
  for (double xi : x) xmax = std::max(xmax, std::abs(xi));
  const double threshold = kClampTolerance + 10.0 * linear_tol * xmax;
  double clamped = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) {
      if (x[i] < -threshold) {
        std::ostringstream os;
        os << stage << " stage produced " << x[i] << " at cell " << i;
        throw PositivityFailure(os.str(), x[i]);
      }
      clamped += -x[i] * vol[i];
      x[i] = 0.0;
    }
  }
  double target = 0.0;
  double current = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    target += vol[i] * rhs[i];
    current += vol[i] * (1.0 + alpha[i]) * x[i];
  }
  if (current > 0.0 && target > 0.0) {
    const double lambda = target / current;
    for (auto& xi : x) xi *= lambda;
  }
  return clamped;
}

struct StepBuffers {
  std::vector<double> rhs, alpha, coeff;
};

StepBuffers& buffers() {
  thread_local StepBuffers b;
  return b;
}

}  // namespace

State step(const State& s, const ModelSpec& m, double dt, const StepOptions& o) {
  if (!(dt > 0.0) || dt > o.dt_max * (1.0 + 1e-12))
    throw PreconditionError("step: dt must lie in (0, dt_max]");
  const Grid& g = s.grid;
  const std::size_t n = g.size();
  const auto vol = g.volumes();
  StepBuffers& buf = buffers();
  std::vector<double>& rhs = buf.rhs;
  std::vector<double>& alpha = buf.alpha;
  std::vector<double>& coeff = buf.coeff;
  rhs.resize(n);

  State next = s;
  double clamped = 0.0;

  // v stage.
  for (std::size_t i = 0; i < n; ++i) rhs[i] = s.v[i] + dt * s.u[i];
  coeff.assign(g.faces().size(), dt);
  alpha.assign(n, dt);
  solve_helmholtz(g, coeff, alpha, rhs, next.v.values(), o.linear_tol, o.max_linear_iters);
  clamped += clamp_and_balance(next.v.values(), rhs, alpha, g, o.linear_tol, "v");

  // u stage: explicit transport and production.
  std::fill(rhs.begin(), rhs.end(), 0.0);
  accumulate_chemotactic_flux(s.u, next.v, m.sensitivity, g, o.scheme, rhs);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = s.u[i] - dt * rhs[i] / vol[i];
  alpha.assign(n, 0.0);
  if (m.source) {
    const SourceSpec& src = *m.source;
    if (o.source == SourceTreatment::patankar) {
      for (std::size_t i = 0; i < n; ++i) {
        rhs[i] += dt * source_production(src, s.u[i]);
        alpha[i] = dt * source_destruction_rate(src, s.u[i]);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) rhs[i] += dt * eval_f(src, s.u[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rhs[i] < 0.0) {
      if (rhs[i] < -kClampTolerance || !std::isfinite(rhs[i])) {
        std::ostringstream os;
        os << "explicit u stage produced " << rhs[i] << " at cell " << i << " with dt = " << dt;
        throw PositivityFailure(os.str(), rhs[i]);
      }
      clamped += -rhs[i] * vol[i];
      rhs[i] = 0.0;
    }
  }

  // u stage: implicit diffusion and destruction.
  coeff = face_diffusion(next.v, m.diffusion, g, m.face_averaging);
  for (auto& c : coeff) c *= dt;
  solve_helmholtz(g, coeff, alpha, rhs, next.u.values(), o.linear_tol, o.max_linear_iters);
  clamped += clamp_and_balance(next.u.values(), rhs, alpha, g, o.linear_tol, "u");

  next.t = s.t + dt;
  next.step_count = s.step_count + 1;
  next.last_dt = dt;
  next.clamped_mass = s.clamped_mass + clamped;
  return next;
}

double adapt_dt(const State& s, const ModelSpec& m, const StepOptions& o) {
  const double rate = max_face_rate(s.v, m.sensitivity, s.grid);
  double dt = rate > 0.0 ? o.cfl_safety / rate : std::numeric_limits<double>::infinity();
  if (m.source && o.source == SourceTreatment::explicit_euler) {
    const double umax = std::max(0.0, s.u.max());
    const double h = 1e-6 * std::max(1.0, umax);
    const double lo = std::max(0.0, umax - h);
    const double slope = (eval_f(*m.source, umax + h) - eval_f(*m.source, lo)) / (umax + h - lo);
    if (std::abs(slope) > 0.0) dt = std::min(dt, 0.5 / std::abs(slope));
  }
  return std::clamp(dt, o.dt_min, o.dt_max);
}

}  // namespace kslab
