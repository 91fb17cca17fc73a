#include "kslab/model.hpp"

#include "kslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace kslab {

namespace {

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string to_string(CoefficientFamily family) {
  switch (family) {
    case CoefficientFamily::constant: return "constant";
    case CoefficientFamily::exponential_decay: return "exponential-decay";
    case CoefficientFamily::saturating_increasing: return "saturating-increasing";
    case CoefficientFamily::tabulated_smooth: return "tabulated-smooth";
  }
  return "unknown";
}

CoefficientFamily coefficient_family_from_string(const std::string& name) {
  if (name == "constant") return CoefficientFamily::constant;
  if (name == "exponential-decay") return CoefficientFamily::exponential_decay;
  if (name == "saturating-increasing") return CoefficientFamily::saturating_increasing;
  if (name == "tabulated-smooth") return CoefficientFamily::tabulated_smooth;
  throw PreconditionError("unknown coefficient family '" + name + "'");
}

std::string to_string(Regime regime) {
  return regime == Regime::degenerate ? "degenerate" : "nondegenerate";
}

// ---------------------------------------------------------------------------
// CoefficientSpec

CoefficientSpec CoefficientSpec::constant(double value) {
  if (!std::isfinite(value)) throw PreconditionError("constant coefficient must be finite");
  CoefficientSpec s;
  s.family_ = CoefficientFamily::constant;
  s.params_ = {value};
  return s;
}

CoefficientSpec CoefficientSpec::exponential_decay(double amplitude, double rate) {
  if (!std::isfinite(amplitude) || !std::isfinite(rate) || rate < 0.0)
    throw PreconditionError("exponential-decay needs finite amplitude and rate >= 0");
  CoefficientSpec s;
  s.family_ = CoefficientFamily::exponential_decay;
  s.params_ = {amplitude, rate};
  return s;
}

CoefficientSpec CoefficientSpec::saturating_increasing(double offset, double scale,
                                                       double half_saturation) {
  if (!std::isfinite(offset) || !std::isfinite(scale) || !(half_saturation > 0.0) ||
      !std::isfinite(half_saturation))
    throw PreconditionError("saturating-increasing needs finite offset/scale and half_saturation > 0");
  CoefficientSpec s;
  s.family_ = CoefficientFamily::saturating_increasing;
  s.params_ = {offset, scale, half_saturation};
  return s;
}

CoefficientSpec CoefficientSpec::tabulated(std::vector<double> knots, std::vector<double> values) {
  const std::size_t n = knots.size();
  if (n < 3 || values.size() != n)
    throw PreconditionError("tabulated-smooth needs at least 3 knots and matching values");
  if (knots.front() != 0.0) throw PreconditionError("tabulated-smooth knots must start at v = 0");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i]))
      throw PreconditionError("tabulated-smooth knots and values must be finite");
    if (i > 0 && !(knots[i] > knots[i - 1]))
      throw PreconditionError("tabulated-smooth knots must be strictly increasing");
  }

  // Natural spline: M_0 = M_{n-1} = 0, tridiagonal system for the interior moments.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = knots[i] - knots[i - 1];
      const double h1 = knots[i + 1] - knots[i];
      diag[i - 1] = 2.0 * (h0 + h1);
      upper[i - 1] = h1;
      rhs[i - 1] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
    }
    // Thomas algorithm; the matrix is symmetric so sub-diagonal equals upper shifted.
    for (std::size_t i = 1; i < k; ++i) {
      const double w = upper[i - 1] / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
  }

  CoefficientSpec s;
  s.family_ = CoefficientFamily::tabulated_smooth;
  s.knots_ = std::move(knots);
  s.values_ = std::move(values);
  s.second_derivs_ = std::move(m);
  return s;
}

double CoefficientSpec::eval_spline(double v) const noexcept {
  const std::size_t n = knots_.size();
  if (v >= knots_[n - 1]) {
    const double h = knots_[n - 1] - knots_[n - 2];
    const double slope = (values_[n - 1] - values_[n - 2]) / h + h * second_derivs_[n - 2] / 6.0;
    return values_[n - 1] + slope * (v - knots_[n - 1]);
  }
  if (v <= knots_[0]) {
    const double h = knots_[1] - knots_[0];
    const double slope = (values_[1] - values_[0]) / h - h * second_derivs_[1] / 6.0;
    return values_[0] + slope * (v - knots_[0]);
  }
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double h = knots_[i + 1] - knots_[i];
  const double a = (knots_[i + 1] - v) / h;
  const double b = (v - knots_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * second_derivs_[i] + (b * b * b - b) * second_derivs_[i + 1]) * h * h / 6.0;
}

double CoefficientSpec::operator()(double v) const noexcept {
  switch (family_) {
    case CoefficientFamily::constant: return params_[0];
    case CoefficientFamily::exponential_decay: return params_[0] * std::exp(-params_[1] * v);
    case CoefficientFamily::saturating_increasing:
      return params_[0] + params_[1] * v / (params_[2] + v);
    case CoefficientFamily::tabulated_smooth: return eval_spline(v);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Source law

SourceSpec::SourceSpec(double r_, double mu_, double p_) : r(r_), mu(mu_), p(p_) {
  if (!std::isfinite(r)) throw PreconditionError("source r must be finite");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionError("source requires mu > 0");
  if (!(p >= 0.0) || !std::isfinite(p)) throw PreconditionError("source requires p >= 0");
}

double log_u_plus_e(double u) noexcept {
  return 1.0 + std::log1p(u / std::numbers::e);
}

namespace {

double log_power(double u, double p) noexcept {
  if (p == 0.0) return 1.0;
  const double l = log_u_plus_e(u);
  if (p == 1.0) return l;
  if (p == 0.5) return std::sqrt(l);
  return std::pow(l, p);
}

}  // namespace

double eval_D(const CoefficientSpec& spec, double v) {
  if (!(v >= 0.0)) throw PreconditionError("eval_D requires v >= 0, got " + fmt_double(v));
  const double d = spec(v);
  if (!(d > 0.0) || !std::isfinite(d))
    throw InvalidCoefficient("diffusion coefficient D(v) = " + fmt_double(d) +
                                 " is not positive at v = " + fmt_double(v),
                             v);
  return d;
}

double finite_difference_slope(const CoefficientSpec& spec, double v, double h) {
  if (v - h < 0.0) return (spec(v + h) - spec(v)) / h;
  return (spec(v + h) - spec(v - h)) / (2.0 * h);
}

double eval_S(const CoefficientSpec& spec, double v) {
  if (!(v >= 0.0)) throw PreconditionError("eval_S requires v >= 0, got " + fmt_double(v));
  const double s = spec(v);
  if (!std::isfinite(s))
    throw InvalidCoefficient("sensitivity S(v) is not finite at v = " + fmt_double(v), v);
  const double h = 1e-6 * std::max(1.0, v);
  const double slope = finite_difference_slope(spec, v, h);
  if (slope < -1e-7 * (1.0 + std::abs(s)))
    throw InvalidCoefficient("sensitivity slope S'(v) = " + fmt_double(slope) +
                                 " is negative at v = " + fmt_double(v),
                             v);
  return s;
}

double eval_f(const SourceSpec& spec, double u) {
  if (!(u >= 0.0)) throw PreconditionError("eval_f requires u >= 0, got " + fmt_double(u));
  return spec.r * u - spec.mu * u * u / log_power(u, spec.p);
}

double source_production(const SourceSpec& spec, double u) noexcept {
  return std::max(spec.r, 0.0) * u;
}

double source_destruction_rate(const SourceSpec& spec, double u) noexcept {
  return spec.mu * u / log_power(u, spec.p) + std::max(-spec.r, 0.0);
}

std::optional<double> homogeneous_steady_state(const SourceSpec& spec) {
  if (!(spec.r > 0.0)) return std::nullopt;
  // Positive roots of f are the roots of g(u) = r ln^p(u+e) - mu u; g(0) = r > 0.
  auto g = [&](double u) { return spec.r * log_power(u, spec.p) - spec.mu * u; };
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi) || hi > 1e300) return std::nullopt;
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double best = hi;
  double best_val = std::abs(eval_f(spec, hi));
  if (lo > 0.0 && std::abs(eval_f(spec, lo)) < best_val) {
    best = lo;
    best_val = std::abs(eval_f(spec, lo));
  }
  if (!(best_val < 1e-12)) return std::nullopt;
  return best;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::passed() const noexcept {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
}

namespace {

std::vector<double> sample_points(double v_max, int samples) {
  std::vector<double> pts(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) pts[static_cast<std::size_t>(i)] = v_max * i / (samples - 1);
  return pts;
}

/// Finite values everywhere and no kinks: second difference quotients at h and h/2 agree.
ValidationEntry smoothness_probe(const std::string& name, const CoefficientSpec& spec,
                                 const std::vector<double>& pts) {
  ValidationEntry e{name + " finite and C^2 on [0, V_max]", true, std::nullopt, ""};
  const double h = 1e-3;
  for (double v : pts) {
    const double y = spec(v);
    if (!std::isfinite(y)) {
      e.passed = false;
      e.witness = v;
      e.detail = "non-finite value";
      return e;
    }
    if (v < 2.0 * h) continue;
    auto d2 = [&](double step) {
      return (spec(v + step) - 2.0 * y + spec(v - step)) / (step * step);
    };
    const double a = d2(h);
    const double b = d2(0.5 * h);
    if (!std::isfinite(a) || !std::isfinite(b) ||
        std::abs(a - b) > 0.1 * (1.0 + std::abs(a) + std::abs(b))) {
      e.passed = false;
      e.witness = v;
      e.detail = "second difference quotient does not settle under step refinement";
      return e;
    }
  }
  return e;
}

}  // namespace

Regime classify_regime(const CoefficientSpec& diffusion, double v_max, int samples) {
  const auto pts = sample_points(v_max, samples);
  double min_d = std::numeric_limits<double>::infinity();
  for (double v : pts) min_d = std::min(min_d, diffusion(v));
  const double step = v_max / (samples - 1);
  const bool decreasing_at_end = diffusion(v_max) < diffusion(v_max - step);
  return (min_d < 1e-6 && decreasing_at_end) ? Regime::degenerate : Regime::nondegenerate;
}

ValidationReport validate_model(const ModelSpec& spec, double v_max, int samples) {
  if (!(v_max > 0.0) || samples < 2)
    throw PreconditionError("validate_model requires V_max > 0 and samples >= 2");
  ValidationReport report;
  const auto pts = sample_points(v_max, samples);

  {
    ValidationEntry e{"D > 0 on [0, V_max]", true, std::nullopt, ""};
    double min_d = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (double v : pts) {
      const double d = spec.diffusion(v);
      if (!(d > min_d)) {
        min_d = d;
        arg = v;
      }
    }
    e.detail = "sampled min D = " + fmt_double(min_d) + " at v = " + fmt_double(arg);
    if (!(min_d > 0.0)) {
      e.passed = false;
      e.witness = arg;
    }
    report.entries.push_back(e);
  }
  report.entries.push_back(smoothness_probe("D", spec.diffusion, pts));

  {
    ValidationEntry e{"S' >= 0 on [0, V_max]", true, std::nullopt, ""};
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double a = spec.sensitivity(pts[i]);
      const double b = spec.sensitivity(pts[i + 1]);
      if (b - a < -1e-12 * (1.0 + std::abs(a))) {
        e.passed = false;
        e.witness = pts[i];
        e.detail = "S decreases from " + fmt_double(a) + " to " + fmt_double(b);
        break;
      }
    }
    report.entries.push_back(e);
  }
  report.entries.push_back(smoothness_probe("S", spec.sensitivity, pts));

  {
    // W^{1,inf} proxy: sampled slopes finite, and S levels off along a geometric tail.
    ValidationEntry e{"S bounded with bounded slope (W^{1,inf})", true, std::nullopt, ""};
    double max_slope = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double s =
          std::abs(spec.sensitivity(pts[i + 1]) - spec.sensitivity(pts[i])) / (pts[i + 1] - pts[i]);
      max_slope = std::max(max_slope, s);
    }
    const double t1 = spec.sensitivity(512.0 * v_max);
    const double t2 = spec.sensitivity(1024.0 * v_max);
    if (!std::isfinite(max_slope)) {
      e.passed = false;
      e.detail = "non-finite slope";
    } else if (!std::isfinite(t2) || std::abs(t2 - t1) > 1e-2 * (1.0 + std::abs(t1))) {
      e.passed = false;
      e.witness = 1024.0 * v_max;
      e.detail = "S keeps growing along the tail: S(512 V) = " + fmt_double(t1) +
                 ", S(1024 V) = " + fmt_double(t2);
    } else {
      e.detail = "sampled max |S'| = " + fmt_double(max_slope);
    }
    report.entries.push_back(e);
  }

  if (spec.source) {
    const auto& src = *spec.source;
    report.entries.push_back({"mu > 0", src.mu > 0.0, std::nullopt, "mu = " + fmt_double(src.mu)});
    report.entries.push_back({"p > 0", src.p > 0.0, std::nullopt, "p = " + fmt_double(src.p)});
    const double f0 = eval_f(src, 0.0);
    report.entries.push_back({"f(0) = 0", f0 == 0.0, std::nullopt, "f(0) = " + fmt_double(f0)});
  }

  report.regime = classify_regime(spec.diffusion, v_max, samples);
  if (spec.source) {
    const double p = spec.source->p;
    if (report.regime == Regime::degenerate && p >= 0.5)
      report.warnings.push_back("degenerate diffusion with p = " + fmt_double(p) +
                                " >= 1/2: outside the hypothesis p < 1/2 for boundedness");
    if (report.regime == Regime::nondegenerate && p >= 1.0)
      report.warnings.push_back("p = " + fmt_double(p) +
                                " >= 1: outside the hypothesis p < 1 for boundedness");
  }
  return report;
}

}  // namespace kslab
