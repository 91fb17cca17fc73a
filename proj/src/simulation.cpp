#include "kslab/simulation.hpp"

#include "kslab/error.hpp"
#include "kslab/initial_data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace kslab {

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::completed: return "completed";
    case Outcome::blowup: return "blowup";
    case Outcome::stalled: return "stalled";
  }
  return "unknown";
}

std::string to_string(StallReason reason) {
  switch (reason) {
    case StallReason::none: return "none";
    case StallReason::dt_below_min: return "dt-below-min";
    case StallReason::positivity: return "positivity";
    case StallReason::max_steps: return "max-steps";
    case StallReason::solver_stall: return "solver-stall";
    case StallReason::invalid_coefficient: return "invalid-coefficient";
  }
  return "unknown";
}

void RunSuprema::update(const DiagnosticsRecord& r) {
  sup_u = std::max(sup_u, r.sup_u);
  sup_v = std::max(sup_v, r.sup_v);
  energy_y = std::max(energy_y, r.energy_y);
  grad_v_sq = std::max(grad_v_sq, r.grad_v_sq);
  lap_v_sq = std::max(lap_v_sq, r.lap_v_sq);
  dissipation_density = std::max(dissipation_density, r.dissipation_density);
  if (lq_norms.size() < r.lq_norms.size()) lq_norms.resize(r.lq_norms.size(), 0.0);
  for (std::size_t i = 0; i < r.lq_norms.size(); ++i) lq_norms[i] = std::max(lq_norms[i], r.lq_norms[i]);
}

nlohmann::json RunResult::summary() const {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j = {{"outcome", to_string(outcome)},
                      {"t_final", t_final},
                      {"t_star", t_star ? nlohmann::json(*t_star) : nlohmann::json(nullptr)},
                      {"steps", steps},
                      {"rejected_steps", rejected_steps},
                      {"initial_mass", initial_mass},
                      {"final_mass", num(final_mass)},
                      {"clamped_mass", clamped_mass},
                      {"sup",
                       {{"sup_u", num(sup.sup_u)},
                        {"sup_v", num(sup.sup_v)},
                        {"energy_y", num(sup.energy_y)},
                        {"grad_v_sq", num(sup.grad_v_sq)},
                        {"lap_v_sq", num(sup.lap_v_sq)},
                        {"dissipation_density", num(sup.dissipation_density)},
                        {"lq_norms", sup.lq_norms}}},
                      {"dissipation_window", dissipation_window ? num(*dissipation_window) : nlohmann::json(nullptr)},
                      {"wall_seconds", wall_seconds},
                      {"warnings", warnings},
                      {"artifacts", artifacts}};
  if (outcome == Outcome::blowup) j["blowup_reason"] = to_string(blowup_reason);
  if (outcome == Outcome::stalled) j["stall_reason"] = to_string(stall_reason);
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

RunResult run(const RunConfig& cfg, RunObserver* observer) {
  const Grid g = cfg.grid.build();
  auto [u0, v0] = make_initial_data(cfg.initial, g, cfg.seed);
  return run_from(cfg, State(g, std::move(u0), std::move(v0), 0.0), observer);
}

RunResult run_from(const RunConfig& cfg, State s, RunObserver* observer) {
  const auto start = std::chrono::steady_clock::now();
  cfg.step.validate();
  cfg.diagnostics.validate();

  const ModelSpec& m = cfg.model;
  const StepOptions& o = cfg.step;
  DiagnosticsConfig d = cfg.diagnostics;
  const double t_end = cfg.t_end;
  if (d.tau == 0.0) d.tau = std::min(1.0, 0.5 * t_end);
  if (d.cadence == 0.0) d.cadence = t_end / 200.0;
  const double p = cfg.source_p();
  const double t_eps = 1e-12 * std::max(1.0, t_end);

  RunResult res;
  res.warnings = cfg.warnings;
  res.initial_mass = integrate(s.u, s.grid);

  auto record = [&](bool blowup) {
    DiagnosticsRecord r = measure(s, d, p);
    r.blowup = blowup;
    res.sup.update(r);
    if (observer) observer->on_record(r);
    res.series.push_back(std::move(r));
  };
  auto snapshot = [&] {
    if (observer) observer->on_snapshot(s);
  };

  record(false);
  snapshot();
  double next_record = d.cadence;
  double next_snapshot = cfg.output.snapshot_cadence > 0.0 ? cfg.output.snapshot_cadence : INFINITY;

  auto stall = [&](StallReason why, std::string detail) {
    res.outcome = Outcome::stalled;
    res.stall_reason = why;
    res.detail = std::move(detail);
  };

  while (s.t < t_end - t_eps) {
    if (res.steps >= cfg.max_steps) {
      stall(StallReason::max_steps, "step budget of " + std::to_string(cfg.max_steps) + " exhausted");
      break;
    }
    double dt = adapt_dt(s, m, o);
    bool to_end = false;
    if (dt >= t_end - s.t) {
      dt = t_end - s.t;
      to_end = true;
    }

    bool halted = false;
    for (int attempt = 0;; ++attempt) {
      try {
        State next = step(s, m, dt, o);
        s = std::move(next);
        break;
      } catch (const PositivityFailure& e) {
        ++res.rejected_steps;
        if (attempt >= cfg.max_retries) {
          if (dt < d.blowup_dt_floor) {
            res.outcome = Outcome::blowup;
            res.blowup_reason = BlowupReason::dt_collapse;
            res.t_star = s.t;
            res.detail = e.what();
          } else {
            stall(StallReason::positivity, e.what());
          }
          halted = true;
          break;
        }
        dt *= 0.5;
        to_end = false;
      } catch (const SolverStall& e) {
        stall(StallReason::solver_stall, e.what());
        halted = true;
        break;
      } catch (const InvalidCoefficient& e) {
        stall(StallReason::invalid_coefficient, e.what());
        halted = true;
        break;
      }
    }
    if (halted) {
      record(res.outcome == Outcome::blowup);
      break;
    }
    if (to_end) s.t = t_end;
    ++res.steps;
    // Pointwise maxima are tracked every step; peaks can fall between records.
    res.sup.sup_u = std::max(res.sup.sup_u, s.u.max());
    res.sup.sup_v = std::max(res.sup.sup_v, s.v.max());

    const BlowupCheck bc = detect_blowup(s, d, s.last_dt);
    if (bc.flagged) {
      res.outcome = Outcome::blowup;
      res.blowup_reason = bc.reason;
      res.t_star = s.t;
      record(true);
      snapshot();
      break;
    }
    if (s.last_dt < o.dt_min * (1.0 - 1e-12) && !to_end) {
      stall(StallReason::dt_below_min, "accepted step " + std::to_string(s.last_dt) + " is below dt_min");
      record(false);
      break;
    }
    if (s.t >= next_record - t_eps || s.t >= t_end - t_eps) {
      record(false);
      next_record = (std::floor(s.t / d.cadence + 1e-9) + 1.0) * d.cadence;
    }
    if (s.t >= next_snapshot - t_eps && s.t < t_end - t_eps) {
      snapshot();
      next_snapshot = (std::floor(s.t / cfg.output.snapshot_cadence + 1e-9) + 1.0) * cfg.output.snapshot_cadence;
    }
  }
  if (res.outcome == Outcome::completed) snapshot();

  res.t_final = s.t;
  res.final_mass = integrate(s.u, s.grid);
  res.clamped_mass = s.clamped_mass;
  if (res.series.back().t - res.series.front().t >= d.tau) {
    res.dissipation_window = dissipation_window(res.series, d.tau);
  }
  res.final_state = std::move(s);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace kslab
