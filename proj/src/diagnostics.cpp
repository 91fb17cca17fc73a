#include "kslab/diagnostics.hpp"

#include "kslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kslab {

void DiagnosticsConfig::validate() const {
  if (!(k > 0.0)) throw PreconditionError("diagnostics.k must be positive");
  if (!(tau >= 0.0)) throw PreconditionError("diagnostics.tau must be positive");
  if (!(cadence >= 0.0)) throw PreconditionError("diagnostics.cadence must be positive");
  if (!(blowup_max_u > 0.0)) throw PreconditionError("diagnostics.blowup_max_u must be positive");
  if (!(blowup_dt_floor >= 0.0)) throw PreconditionError("diagnostics.blowup_dt_floor must be >= 0");
  for (double q : q_list)
    if (!(q > 0.0)) throw PreconditionError("diagnostics.q_list entries must be positive");
}

std::vector<std::string> DiagnosticsConfig::admissibility_warnings(Regime regime, double p) const {
  std::vector<std::string> w;
  const double lo = regime == Regime::degenerate ? 1.0 + p : p;
  const double hi = 2.0 - p;
  if (!(k > lo && k < hi)) {
    std::ostringstream os;
    os << "energy exponent k = " << k << " outside the admissible interval (" << lo << ", " << hi
       << ") for the " << to_string(regime) << " regime";
    w.push_back(os.str());
  }
  return w;
}

double default_energy_exponent(Regime regime) {
  return regime == Regime::degenerate ? 1.5 : 1.0;
}

double energy_y(const State& s, double k) {
  const auto vol = s.grid.volumes();
  double e = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double u = s.u[i];
    e += vol[i] * u * (k == 0.0 ? 1.0 : std::pow(log_u_plus_e(u), k));
  }
  return e + 0.5 * grad_sq_integral(s.v, s.grid);
}

double dissipation_density(const Field& u, const Grid& g, double k, double p) {
  require_on_grid(u, g, "dissipation_density");
  const auto vol = g.volumes();
  const double expo = k - p;
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    s += vol[i] * ui * ui * (expo == 0.0 ? 1.0 : std::pow(log_u_plus_e(ui), expo));
  }
  return s;
}

double lq_norm(const Field& u, const Grid& g, double q) {
  require_on_grid(u, g, "lq_norm");
  double sup = 0.0;
  for (double x : u.values()) sup = std::max(sup, std::abs(x));
  if (sup == 0.0 || !std::isfinite(sup)) return sup;
  const auto vol = g.volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += vol[i] * std::pow(std::abs(u[i]) / sup, q);
  return sup * std::pow(s, 1.0 / q);
}

DiagnosticsRecord measure(const State& s, const DiagnosticsConfig& d, double p) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.mass = integrate(s.u, s.grid);
  r.sup_u = s.u.max();
  r.sup_v = s.v.max();
  r.grad_v_sq = grad_sq_integral(s.v, s.grid);
  double e = 0.0;
  const auto vol = s.grid.volumes();
  for (std::size_t i = 0; i < s.u.size(); ++i) e += vol[i] * s.u[i] * std::pow(log_u_plus_e(s.u[i]), d.k);
  r.energy_y = e + 0.5 * r.grad_v_sq;
  const Field lap = laplacian_neumann(s.v, s.grid);
  double l2 = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) l2 += vol[i] * lap[i] * lap[i];
  r.lap_v_sq = l2;
  r.dissipation_density = dissipation_density(s.u, s.grid, d.k, p);
  r.lq_norms.reserve(d.q_list.size());
  for (double q : d.q_list) r.lq_norms.push_back(lq_norm(s.u, s.grid, q));
  r.clamped_mass = s.clamped_mass;
  return r;
}

double dissipation_window(std::span<const DiagnosticsRecord> series, double tau) {
  if (!(tau > 0.0)) throw PreconditionError("dissipation_window: tau must be positive");
  if (series.size() < 2) throw WindowTooShort("dissipation_window: need at least two records");
  for (std::size_t i = 1; i < series.size(); ++i)
    if (!(series[i].t > series[i - 1].t)) throw PreconditionError("dissipation_window: series not time-sorted");
  const double t0 = series.front().t;
  const double t1 = series.back().t;
  const double slack = 1e-12 * std::max(1.0, std::abs(t1));
  if (t1 - t0 < tau - slack) throw WindowTooShort("dissipation_window: series spans less than tau");

  const std::size_t n = series.size();
  std::vector<double> g(n), cum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) g[i] = series[i].dissipation_density + series[i].lap_v_sq;
  for (std::size_t i = 1; i < n; ++i)
    cum[i] = cum[i - 1] + 0.5 * (g[i] + g[i - 1]) * (series[i].t - series[i - 1].t);

  double best = 0.0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double te = std::min(series[i].t + tau, t1);
    if (series[i].t + tau > t1 + slack) break;
    j = std::max(j, i);
    while (j + 1 < n && series[j + 1].t <= te) ++j;
    double integral = cum[j] - cum[i];
    if (j + 1 < n && te > series[j].t) {
      const double frac = (te - series[j].t) / (series[j + 1].t - series[j].t);
      const double ge = g[j] + frac * (g[j + 1] - g[j]);
      integral += 0.5 * (g[j] + ge) * (te - series[j].t);
    }
    best = std::max(best, integral);
  }
  return best;
}

MoserLadder moser_ladder(const Field& u, const Grid& g, double q0, int levels) {
  if (!(q0 > 2.0)) throw PreconditionError("moser_ladder: q0 must exceed 2");
  if (levels < 0) throw PreconditionError("moser_ladder: levels must be >= 0");
  require_on_grid(u, g, "moser_ladder");
  if (u.min() < 0.0) throw PreconditionError("moser_ladder: u must be nonnegative");
  MoserLadder ladder;
  ladder.sup = u.max();
  const double measure = g.measure();
  double q = q0;
  for (int j = 0; j <= levels; ++j, q *= 2.0) {
    const double norm = lq_norm(u, g, q);
    ladder.rungs.push_back({q, norm, norm / std::pow(measure, 1.0 / q)});
  }
  for (std::size_t j = 1; j < ladder.rungs.size(); ++j) {
    const double prev = ladder.rungs[j - 1].normalized;
    if (ladder.rungs[j].normalized < prev * (1.0 - 1e-12))
      throw Error("moser_ladder: normalized norms decrease between q = " +
                  std::to_string(ladder.rungs[j - 1].q) + " and q = " + std::to_string(ladder.rungs[j].q));
  }
  return ladder;
}

std::string to_string(BlowupReason reason) {
  switch (reason) {
    case BlowupReason::none: return "none";
    case BlowupReason::threshold: return "threshold";
    case BlowupReason::nonfinite: return "nonfinite";
    case BlowupReason::dt_collapse: return "dt_collapse";
  }
  return "unknown";
}

BlowupCheck detect_blowup(const State& s, const DiagnosticsConfig& d, double last_dt) {
  double sup = 0.0;
  for (double x : s.u.values()) {
    if (!std::isfinite(x)) return {true, BlowupReason::nonfinite};
    sup = std::max(sup, x);
  }
  if (!s.v.all_finite()) return {true, BlowupReason::nonfinite};
  if (sup > d.blowup_max_u) return {true, BlowupReason::threshold};
  if (last_dt > 0.0 && last_dt < d.blowup_dt_floor) return {true, BlowupReason::dt_collapse};
  return {};
}

namespace {

void append_number(std::string& out, double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

}  // namespace

std::string csv_header(const std::vector<double>& q_list) {
  std::string h = "t,mass,energy_y,sup_u,sup_v,grad_v_sq,lap_v_sq,dissipation_density";
  for (double q : q_list) {
    char buf[40];
    std::snprintf(buf, sizeof buf, ",norm_L%g", q);
    h += buf;
  }
  h += ",clamped_mass,blowup";
  return h;
}

std::string csv_row(const DiagnosticsRecord& r) {
  std::string s;
  for (double x : {r.t, r.mass, r.energy_y, r.sup_u, r.sup_v, r.grad_v_sq, r.lap_v_sq,
                   r.dissipation_density}) {
    if (!s.empty()) s += ',';
    append_number(s, x);
  }
  for (double x : r.lq_norms) {
    s += ',';
    append_number(s, x);
  }
  s += ',';
  append_number(s, r.clamped_mass);
  s += r.blowup ? ",1" : ",0";
  return s;
}

}  // namespace kslab
