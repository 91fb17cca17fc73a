#include "kslab/inequalities.hpp"

#include "kslab/error.hpp"
#include "kslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kslab {

namespace {

struct Case {
  double lhs{0.0};
  double bracket{0.0};
  nlohmann::json label;
};

// Fits C = max lhs / bracket on `fit`, then checks lhs <= slack * C * bracket on `check`.
InequalityReport fit_and_revalidate(std::string lemma, nlohmann::json parameters,
                                    const FieldEnsemble& e, const std::vector<Case>& fit,
                                    const std::vector<Case>& check) {
  InequalityReport rep;
  rep.lemma = std::move(lemma);
  rep.parameters = std::move(parameters);
  rep.ensemble = e.describe();

  double c = 0.0;
  bool finite = true;
  for (const Case& k : fit) {
    if (k.lhs <= 0.0) continue;
    if (k.bracket <= 0.0) {
      finite = false;
      rep.witness = {{"stage", "fit"}, {"case", k.label}, {"lhs", k.lhs}, {"bracket", k.bracket}};
      break;
    }
    c = std::max(c, k.lhs / k.bracket);
  }
  if (!finite) {
    rep.fitted_constant = std::numeric_limits<double>::infinity();
    rep.min_margin = -std::numeric_limits<double>::infinity();
    rep.min_relative_margin = -std::numeric_limits<double>::infinity();
    rep.passed = false;
    return rep;
  }
  rep.fitted_constant = c;

  double worst = std::numeric_limits<double>::infinity();
  double worst_rel = std::numeric_limits<double>::infinity();
  for (const Case& k : check) {
    const double rhs = kRevalidationSlack * c * k.bracket;
    const double margin = rhs - k.lhs;
    const double rel = rhs > 0.0 ? margin / rhs : (margin >= 0.0 ? 0.0 : -1.0);
    if (rel < worst_rel) {
      worst_rel = rel;
      worst = margin;
      rep.witness = {{"stage", "revalidate"}, {"case", k.label}, {"lhs", k.lhs}, {"rhs", rhs}};
    }
  }
  rep.min_margin = worst;
  rep.min_relative_margin = worst_rel;
  rep.passed = worst >= 0.0;
  return rep;
}

void require_nonnegative(std::span<const double> f, const char* what) {
  for (double x : f) {
    if (!(x >= 0.0)) throw PreconditionError(std::string(what) + " must be nonnegative and finite");
  }
}

}  // namespace

nlohmann::json InequalityReport::to_json() const {
  return {{"lemma", lemma},
          {"parameters", parameters},
          {"ensemble", ensemble},
          {"fitted_constant", std::isfinite(fitted_constant) ? nlohmann::json(fitted_constant)
                                                             : nlohmann::json(nullptr)},
          {"slack", kRevalidationSlack},
          {"min_margin", std::isfinite(min_margin) ? nlohmann::json(min_margin) : nlohmann::json(nullptr)},
          {"min_relative_margin", std::isfinite(min_relative_margin) ? nlohmann::json(min_relative_margin)
                                                                     : nlohmann::json(nullptr)},
          {"witness", witness},
          {"passed", passed}};
}

double discrete_norm(std::span<const double> f, const Grid& g, double q) {
  if (f.size() != g.size()) throw GridMismatch("field size does not match the grid");
  if (!(q > 0.0)) throw PreconditionError("norm exponent must be positive");
  double top = 0.0;
  for (double x : f) top = std::max(top, std::abs(x));
  if (top == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) s += g.volume(c) * std::pow(std::abs(f[c]) / top, q);
  return top * std::pow(s, 1.0 / q);
}

double discrete_grad_norm(std::span<const double> f, const Grid& g, double r) {
  if (f.size() != g.size()) throw GridMismatch("field size does not match the grid");
  if (!(r >= 1.0)) throw PreconditionError("gradient norm exponent must be >= 1");
  return std::pow(grad_power_integral(f, g, r), 1.0 / r);
}

double gn_exponent(double p, double q, double r) {
  const double den = 1.0 / q + 0.5 - 1.0 / r;
  if (!(den > 0.0)) throw PreconditionError("GN exponents give a nonpositive denominator");
  return (1.0 / q - 1.0 / p) / den;
}

GnTerms gn_terms(std::span<const double> f, const Grid& g, double p, double q, double r, double s) {
  const double a = gn_exponent(p, q, r);
  GnTerms t;
  t.lhs = std::pow(discrete_norm(f, g, p), p);
  const double grad = discrete_grad_norm(f, g, r);
  const double lq = discrete_norm(f, g, q);
  const double ls = discrete_norm(f, g, s);
  t.bracket = std::pow(grad, p * a) * std::pow(lq, p * (1.0 - a)) + std::pow(ls, p);
  return t;
}

InequalityReport check_gn(const FieldEnsemble& e, double p, double q, double r, double s) {
  if (!(r >= 1.0)) throw PreconditionError("GN requires r >= 1");
  if (!(q > 0.0) || !(p >= q) || !std::isfinite(p)) throw PreconditionError("GN requires 0 < q <= p < inf");
  if (!(s > 0.0)) throw PreconditionError("GN requires s > 0");
  const double a = gn_exponent(p, q, r);
  if (a < 0.0 || a > 1.0) throw PreconditionError("GN exponent a must lie in [0, 1]");

  auto collect = [&](const FieldEnsemble& ens) {
    std::vector<Case> cases;
    for (int i = 0; i < ens.count; ++i) {
      const auto f = ens.member(i);
      require_nonnegative(f, "ensemble field");
      const GnTerms t = gn_terms(f, ens.grid, p, q, r, s);
      cases.push_back({t.lhs, t.bracket, {{"index", i}, {"seed", ens.seed}}});
    }
    return cases;
  };
  nlohmann::json params = {{"p", p}, {"q", q}, {"r", r}, {"s", s}, {"a", a}};
  return fit_and_revalidate("gagliardo-nirenberg", params, e, collect(e), collect(e.fresh()));
}

EtaTerms eta_terms(std::span<const double> f, const Grid& g, double eta) {
  if (f.size() != g.size()) throw GridMismatch("field size does not match the grid");
  if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  double sq = 0.0;
  double l1 = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) {
    sq += g.volume(c) * f[c] * f[c];
    l1 += g.volume(c) * std::abs(f[c]);
  }
  return {sq, eta * grad_power_integral(f, g, 2.0) + l1 * l1 / eta};
}

InequalityReport check_eta_interpolation(const FieldEnsemble& e, const std::vector<double>& etas) {
  if (etas.empty()) throw PreconditionError("eta list must not be empty");
  for (double eta : etas) {
    if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  }
  auto collect = [&](const FieldEnsemble& ens) {
    std::vector<Case> cases;
    for (int i = 0; i < ens.count; ++i) {
      const auto f = ens.member(i);
      require_nonnegative(f, "ensemble field");
      for (double eta : etas) {
        const EtaTerms t = eta_terms(f, ens.grid, eta);
        cases.push_back({t.lhs, t.bracket, {{"index", i}, {"eta", eta}, {"seed", ens.seed}}});
      }
    }
    return cases;
  };
  return fit_and_revalidate("eta-interpolation", {{"etas", etas}}, e, collect(e), collect(e.fresh()));
}

std::string to_string(Gauge gauge) {
  switch (gauge) {
    case Gauge::log_shift: return "log";
    case Gauge::square_root: return "sqrt";
    case Gauge::identity: return "identity";
  }
  return "unknown";
}

Gauge gauge_from_string(const std::string& name) {
  if (name == "log") return Gauge::log_shift;
  if (name == "sqrt") return Gauge::square_root;
  if (name == "identity") return Gauge::identity;
  throw PreconditionError("unknown gauge '" + name + "'");
}

double eval_gauge(Gauge gauge, double s) {
  switch (gauge) {
    case Gauge::log_shift: return log_u_plus_e(s);
    case Gauge::square_root: return std::sqrt(s);
    case Gauge::identity: return s;
  }
  return s;
}

double truncation_cutoff(double s, double n) {
  const double a = std::abs(s);
  if (a <= n) return 0.0;
  if (a <= 2.0 * n) return 2.0 * (a - n);
  return a;
}

nlohmann::json TruncationReport::to_json() const {
  return {{"q", q},
          {"N", level},
          {"gauge", to_string(gauge)},
          {"branch_identities", branch_identities},
          {"first", {{"lhs", first_lhs}, {"rhs", first_rhs}, {"holds", first_holds()}}},
          {"second", {{"lhs", second_lhs}, {"rhs", second_rhs}, {"holds", second_holds()}}},
          {"assembled",
           {{"lhs", assembled_lhs}, {"grad_term", grad_term}, {"mass_term", mass_term}, {"tail_term", tail_term}}}};
}

TruncationReport check_truncation(std::span<const double> u, const Grid& g, double q, double level,
                                  Gauge gauge) {
  if (u.size() != g.size()) throw GridMismatch("field size does not match the grid");
  if (!(level > 0.0)) throw PreconditionError("truncation level N must be positive");
  if (!(q > 0.0)) throw PreconditionError("truncation exponent q must be positive");
  require_nonnegative(u, "density");

  TruncationReport rep;
  rep.q = q;
  rep.level = level;
  rep.gauge = gauge;
  const double gn = eval_gauge(gauge, level);
  if (!(gn > 0.0)) throw PreconditionError("gauge must be positive at N");

  std::vector<double> half_power(u.size());
  double mass = 0.0;
  double weighted = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    const double vol = g.volume(c);
    const double s = u[c];
    const double xi = truncation_cutoff(s, level);
    if (xi < 0.0 || xi > s || s - xi > 2.0 * level) rep.branch_identities = false;
    rep.first_lhs += vol * std::pow(std::abs(s - xi), q + 1.0);
    rep.second_lhs += vol * xi;
    mass += vol * s;
    weighted += vol * s * eval_gauge(gauge, s);
    rep.assembled_lhs += vol * std::pow(s, q + 1.0);
    half_power[c] = std::pow(s, 0.5 * q);
  }
  rep.first_rhs = std::pow(2.0 * level, q) * mass;
  rep.second_rhs = weighted / gn;
  rep.grad_term = grad_power_integral(half_power, g, 2.0) * weighted / gn;
  rep.mass_term = std::pow(mass, q + 1.0) / std::pow(g.measure(), q);
  rep.tail_term = std::pow(2.0, q) * rep.first_rhs;
  return rep;
}

TruncationReport check_truncation(const Field& u, const Grid& g, double q, double level, Gauge gauge) {
  require_on_grid(u, g, "u");
  return check_truncation(u.values(), g, q, level, gauge);
}

InequalityReport check_truncation_ensemble(const FieldEnsemble& e, double q,
                                           const std::vector<double>& levels, Gauge gauge) {
  if (levels.empty()) throw PreconditionError("truncation level list must not be empty");
  bool steps_ok = true;
  nlohmann::json step_witness;
  auto collect = [&](const FieldEnsemble& ens) {
    std::vector<Case> cases;
    for (int i = 0; i < ens.count; ++i) {
      const auto f = ens.member(i);
      for (double n : levels) {
        const TruncationReport t = check_truncation(f, ens.grid, q, n, gauge);
        if (!t.proof_steps_hold() && steps_ok) {
          steps_ok = false;
          step_witness = {{"index", i}, {"N", n}, {"seed", ens.seed}, {"report", t.to_json()}};
        }
        cases.push_back({std::max(0.0, t.assembled_lhs - t.mass_term - t.tail_term), t.grad_term,
                         {{"index", i}, {"N", n}, {"seed", ens.seed}}});
      }
    }
    return cases;
  };
  const auto fit = collect(e);
  const auto check = collect(e.fresh());
  InequalityReport rep = fit_and_revalidate(
      "truncation", {{"q", q}, {"levels", levels}, {"gauge", to_string(gauge)}}, e, fit, check);
  if (!steps_ok) {
    rep.passed = false;
    rep.witness = {{"stage", "proof-step"}, {"case", step_witness}};
  }
  return rep;
}

nlohmann::json SequenceReport::to_json() const {
  return {{"sup", sup}, {"bound", bound}, {"holds", holds}, {"length", iterates.size()}};
}

SequenceReport check_sequence_lemma(const std::vector<double>& a, const std::vector<double>& b, double u1) {
  if (a.size() != b.size()) throw PreconditionError("sequences a and b must have equal length");
  if (!(u1 > 0.0) || !std::isfinite(u1)) throw PreconditionError("u_1 must be positive");
  double sum_a = 0.0;
  double prod_b = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!(a[k] >= 0.0) || !std::isfinite(a[k])) throw PreconditionError("sequence a must be nonnegative");
    if (!(b[k] >= 1.0)) throw PreconditionError("sequence b must satisfy b_k >= 1");
    sum_a += a[k];
    prod_b *= b[k];
  }
  SequenceReport rep;
  rep.iterates.reserve(a.size() + 1);
  double u = u1;
  rep.iterates.push_back(u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    u = a[k] + b[k] * u;
    rep.iterates.push_back(u);
  }
  rep.sup = *std::max_element(rep.iterates.begin(), rep.iterates.end());
  rep.bound = sum_a * prod_b + prod_b * u1;
  if (!std::isfinite(rep.sup) || !std::isfinite(rep.bound)) {
    throw PreconditionError("sequence iterates overflow");
  }
  rep.holds = rep.sup <= rep.bound * (1.0 + 1e-12);
  return rep;
}

nlohmann::json RandomizedSequenceSummary::to_json() const {
  return {{"trials", trials}, {"failures", failures}, {"max_ratio", max_ratio}};
}

RandomizedSequenceSummary check_sequence_lemma_randomized(int trials, std::uint64_t seed, int length) {
  if (trials <= 0 || length <= 0) throw PreconditionError("trials and length must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RandomizedSequenceSummary out;
  out.trials = trials;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> a(static_cast<std::size_t>(length));
    std::vector<double> b(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k) {
      a[k] = std::exp(-5.0 + 7.0 * u01(rng));
      b[k] = u01(rng) < 0.2 ? 1.0 : 1.0 + 0.2 * u01(rng);
    }
    const double u1 = std::exp(-3.0 + 6.0 * u01(rng));
    const SequenceReport r = check_sequence_lemma(a, b, u1);
    if (!r.holds) ++out.failures;
    out.max_ratio = std::max(out.max_ratio, r.sup / r.bound);
  }
  return out;
}

bool LogDominationReport::passed() const noexcept {
  return std::all_of(entries.begin(), entries.end(), [](const LogDominationEntry& e) { return e.finite; });
}

nlohmann::json LogDominationReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"epsilon", e.epsilon},
                    {"c", std::isfinite(e.c) ? nlohmann::json(e.c) : nlohmann::json(nullptr)},
                    {"argmax", e.argmax},
                    {"finite", e.finite}});
  }
  return {{"a1", a1}, {"b1", b1}, {"a2", a2}, {"b2", b2}, {"entries", rows}, {"passed", passed()}};
}

LogDominationReport check_log_domination(double a1, double b1, double a2, double b2,
                                         const std::vector<double>& u_grid,
                                         const std::vector<double>& epsilons) {
  if (!(a1 < a2)) throw PreconditionError("log domination requires a1 < a2");
  if (u_grid.empty()) throw PreconditionError("u grid must not be empty");
  for (double u : u_grid) {
    if (!(u >= 0.0) || !std::isfinite(u)) throw PreconditionError("u grid must be nonnegative");
  }
  LogDominationReport rep{a1, b1, a2, b2, {}};
  const double grid_top = *std::max_element(u_grid.begin(), u_grid.end());
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw PreconditionError("epsilon must be positive");
    auto h = [&](double u) {
      const double l = log_u_plus_e(u);
      return std::pow(u, a1) * std::pow(l, b1) - eps * std::pow(u, a2) * std::pow(l, b2);
    };
    LogDominationEntry entry;
    entry.epsilon = eps;
    entry.c = -std::numeric_limits<double>::infinity();
    for (double u : u_grid) {
      const double v = h(u);
      if (v > entry.c) {
        entry.c = v;
        entry.argmax = u;
      }
    }
    // Doubling continuation past the grid; the tail must turn negative and keep decreasing.
    constexpr int kTail = 8;
    std::vector<double> tail;
    for (double u = std::max(grid_top, 1.0) * 2.0; u < 1e150; u *= 2.0) {
      const double v = h(u);
      if (!std::isfinite(v)) break;
      if (v > entry.c) {
        entry.c = v;
        entry.argmax = u;
      }
      tail.push_back(v);
      if (tail.size() >= kTail) {
        bool settled = true;
        for (std::size_t i = tail.size() - kTail; i < tail.size(); ++i) {
          if (tail[i] >= 0.0 || (i > tail.size() - kTail && tail[i] >= tail[i - 1])) settled = false;
        }
        if (settled) {
          entry.finite = true;
          break;
        }
      }
    }
    rep.entries.push_back(entry);
  }
  return rep;
}

}  // namespace kslab
