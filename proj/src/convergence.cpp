#include "kslab/convergence.hpp"

#include "kslab/error.hpp"
#include "kslab/simulation.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace kslab {

namespace {

double l2_distance(std::span<const double> a, std::span<const double> b, const Grid& g) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += g.volume(c) * (a[c] - b[c]) * (a[c] - b[c]);
  return std::sqrt(s);
}

// Volume-weighted average of a fine field onto a grid `factor` times coarser.
std::vector<double> restrict_to(const std::vector<double>& fine, const Grid& fg, const Grid& cg, int factor) {
  std::vector<double> out(cg.size(), 0.0);
  std::vector<double> vol(cg.size(), 0.0);
  for (std::size_t c = 0; c < fg.size(); ++c) {
    std::size_t target;
    if (fg.geometry() == Geometry::radial_disk) {
      target = c / static_cast<std::size_t>(factor);
    } else {
      const std::size_t i = c % static_cast<std::size_t>(fg.nx());
      const std::size_t j = c / static_cast<std::size_t>(fg.nx());
      target = (j / factor) * static_cast<std::size_t>(cg.nx()) + i / factor;
    }
    out[target] += fg.volume(c) * fine[c];
    vol[target] += fg.volume(c);
  }
  for (std::size_t c = 0; c < out.size(); ++c) out[c] /= vol[c];
  return out;
}

struct LevelRun {
  Grid grid;
  std::vector<double> u;
  double wall{0.0};
};

LevelRun run_level(RunConfig cfg, int n, double dt) {
  if (cfg.grid.geometry == Geometry::radial_disk) {
    cfg.grid.nr = n;
  } else {
    const double aspect = static_cast<double>(cfg.grid.ny) / cfg.grid.nx;
    cfg.grid.nx = n;
    cfg.grid.ny = std::max(4, static_cast<int>(std::lround(n * aspect)));
  }
  cfg.step.dt_max = dt;
  cfg.step.dt_min = dt;
  cfg.max_retries = 0;
  cfg.diagnostics.cadence = cfg.t_end;
  cfg.output.snapshot_cadence = 0.0;
  const RunResult res = run(cfg);
  if (res.outcome != Outcome::completed) {
    throw Error("convergence level n=" + std::to_string(n) + " dt=" + std::to_string(dt) + " did not complete: " +
                to_string(res.outcome) + " " + res.detail);
  }
  return {res.final_state->grid, res.final_state->u.data(), res.wall_seconds};
}

}  // namespace

std::string to_string(ConvergenceKind kind) { return kind == ConvergenceKind::space ? "space" : "time"; }

ConvergenceKind convergence_kind_from_string(const std::string& name) {
  if (name == "space") return ConvergenceKind::space;
  if (name == "time") return ConvergenceKind::time;
  throw PreconditionError("convergence kind must be 'space' or 'time'");
}

std::optional<double> ConvergenceReport::observed_order() const {
  if (kind == ConvergenceKind::time && !richardson_orders.empty()) return richardson_orders.back();
  if (!orders.empty()) return orders.back();
  return std::nullopt;
}

nlohmann::json ConvergenceReport::to_json() const {
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& l : levels) {
    lv.push_back({{"n", l.n}, {"dt", l.dt}, {"error", l.error}, {"wall_seconds", l.wall_seconds}});
  }
  const auto obs = observed_order();
  return {{"kind", to_string(kind)},
          {"reference", reference},
          {"levels", lv},
          {"ratios", ratios},
          {"orders", orders},
          {"richardson_orders", richardson_orders},
          {"observed_order", obs ? nlohmann::json(*obs) : nlohmann::json(nullptr)}};
}

bool has_heat_reference(const RunConfig& cfg) {
  const ModelSpec& m = cfg.model;
  return cfg.grid.geometry == Geometry::rectangle && !m.source && m.diffusion.is_constant() &&
         m.sensitivity.is_constant() && m.sensitivity(0.0) == 0.0 &&
         cfg.initial.kind == InitialKind::perturbed_constant && !cfg.initial.random_coefficients;
}

std::vector<double> heat_reference(const RunConfig& cfg, const Grid& g, double t) {
  if (!has_heat_reference(cfg)) throw PreconditionError("configuration has no closed-form heat solution");
  constexpr double pi = std::numbers::pi;
  const InitialDataSpec& s = cfg.initial;
  const double base = s.mass ? *s.mass / g.measure() : s.value;
  const double d = cfg.model.diffusion(0.0);
  const double weight = 1.0 / static_cast<double>(s.modes.size());
  std::vector<double> u(g.size());
  for (std::size_t c = 0; c < u.size(); ++c) {
    double wave = 0.0;
    for (const auto& m : s.modes) {
      const double kx = m.m * pi / g.lx();
      const double ky = m.n * pi / g.ly();
      wave += weight * std::cos(kx * g.x(c)) * std::cos(ky * g.y(c)) * std::exp(-d * (kx * kx + ky * ky) * t);
    }
    u[c] = base * (1.0 + s.amplitude * wave);
  }
  return u;
}

ConvergenceReport convergence_study(const RunConfig& base, int levels, ConvergenceKind kind) {
  if (levels < 2) throw PreconditionError("a convergence study needs at least two levels");
  ConvergenceReport rep;
  rep.kind = kind;
  const int n0 = base.grid.geometry == Geometry::radial_disk ? base.grid.nr : base.grid.nx;
  const double dt0 = base.step.dt_max;

  std::vector<LevelRun> runs;
  for (int j = 0; j < levels; ++j) {
    const int n = kind == ConvergenceKind::space ? n0 << j : n0;
    const double dt = kind == ConvergenceKind::space ? dt0 / std::pow(4.0, j) : dt0 / std::pow(2.0, j);
    runs.push_back(run_level(base, n, dt));
    rep.levels.push_back({n, dt, 0.0, runs.back().wall});
  }

  const bool analytic = kind == ConvergenceKind::space && has_heat_reference(base);
  rep.reference = analytic ? "analytic" : "finest";
  const int last = analytic ? levels : levels - 1;
  for (int j = 0; j < levels; ++j) {
    const Grid& g = runs[j].grid;
    if (analytic) {
      rep.levels[j].error = l2_distance(runs[j].u, heat_reference(base, g, base.t_end), g);
    } else if (j < levels - 1) {
      const int factor = kind == ConvergenceKind::space ? 1 << (levels - 1 - j) : 1;
      rep.levels[j].error = l2_distance(runs[j].u, restrict_to(runs.back().u, runs.back().grid, g, factor), g);
    }
  }
  for (int j = 0; j + 1 < last; ++j) {
    const double ratio = rep.levels[j].error / rep.levels[j + 1].error;
    rep.ratios.push_back(ratio);
    rep.orders.push_back(std::log2(ratio));
  }
  for (int j = 0; j + 2 < levels; ++j) {
    const int f1 = kind == ConvergenceKind::space ? 2 : 1;
    const Grid& g = runs[j].grid;
    const double d0 = l2_distance(runs[j].u, restrict_to(runs[j + 1].u, runs[j + 1].grid, g, f1), g);
    const Grid& g1 = runs[j + 1].grid;
    const double d1 = l2_distance(runs[j + 1].u, restrict_to(runs[j + 2].u, runs[j + 2].grid, g1, f1), g1);
    rep.richardson_orders.push_back(std::log2(d0 / d1));
  }
  return rep;
}

}  // namespace kslab
