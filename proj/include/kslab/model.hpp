#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kslab {

enum class CoefficientFamily { constant, exponential_decay, saturating_increasing, tabulated_smooth };

std::string to_string(CoefficientFamily family);
CoefficientFamily coefficient_family_from_string(const std::string& name);

/**
 * A scalar coefficient function of the chemical concentration v >= 0.
 *
 *  - constant:               c
 *  - exponential-decay:      a * exp(-lambda v), lambda >= 0
 *  - saturating-increasing:  c0 + a v / (b + v), b > 0
 *  - tabulated-smooth:       natural cubic spline through (v_i, y_i) with v_0 = 0,
 *                            extended linearly past the last knot (C^2 everywhere)
 *
 * Immutable after construction.
 */
class CoefficientSpec {
public:
  static CoefficientSpec constant(double value);
  static CoefficientSpec exponential_decay(double amplitude, double rate);
  static CoefficientSpec saturating_increasing(double offset, double scale, double half_saturation);
  static CoefficientSpec tabulated(std::vector<double> knots, std::vector<double> values);

  CoefficientFamily family() const noexcept { return family_; }
  const std::vector<double>& parameters() const noexcept { return params_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Raw evaluation; no admissibility checks.
  double operator()(double v) const noexcept;

  bool is_constant() const noexcept { return family_ == CoefficientFamily::constant; }

private:
  CoefficientSpec() = default;
  double eval_spline(double v) const noexcept;

  CoefficientFamily family_{CoefficientFamily::constant};
  std::vector<double> params_;
  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> second_derivs_;
};

/// f(u) = r u - mu u^2 / ln^p(u + e).
struct SourceSpec {
  double r{0.0};
  double mu{1.0};
  double p{0.5};

  /// Throws PreconditionError unless mu > 0 and p >= 0.
  SourceSpec(double r, double mu, double p);
};

enum class Regime { nondegenerate, degenerate };
std::string to_string(Regime regime);

/// How diffusion coefficients are averaged onto cell faces.
enum class FaceAveraging {
  arithmetic,  ///< D((v_L + v_R) / 2)
  harmonic     ///< 2 D(v_L) D(v_R) / (D(v_L) + D(v_R))
};

struct ModelSpec {
  CoefficientSpec diffusion = CoefficientSpec::constant(1.0);
  CoefficientSpec sensitivity = CoefficientSpec::constant(1.0);
  std::optional<SourceSpec> source;
  FaceAveraging face_averaging{FaceAveraging::arithmetic};
  Regime regime{Regime::nondegenerate};
};

/// Precise ln(u + e) for u >= 0, computed as 1 + log1p(u / e).
double log_u_plus_e(double u) noexcept;

double eval_D(const CoefficientSpec& spec, double v);
double eval_S(const CoefficientSpec& spec, double v);
double eval_f(const SourceSpec& spec, double u);

/// Linear growth part r_+ u of the source (treated explicitly by the Patankar split).
double source_production(const SourceSpec& spec, double u) noexcept;
/// Per-unit-density destruction rate mu u / ln^p(u+e) + r_- (treated implicitly).
double source_destruction_rate(const SourceSpec& spec, double u) noexcept;

/// Positive root of f on (0, inf), if r > 0 and the root is resolved to |f| < 1e-12.
std::optional<double> homogeneous_steady_state(const SourceSpec& spec);

struct ValidationEntry {
  std::string condition;
  bool passed{true};
  std::optional<double> witness;  ///< offending sample point, when failed
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  Regime regime{Regime::nondegenerate};
  std::vector<std::string> warnings;

  bool passed() const noexcept;
};

/// Sampled certification of positivity/smoothness of D, monotonicity/boundedness of S,
/// and the source constraints. Failures are entries of the report, never exceptions.
ValidationReport validate_model(const ModelSpec& spec, double v_max = 50.0, int samples = 1001);

/// Regime from the sampled minimum of D on [0, v_max].
Regime classify_regime(const CoefficientSpec& diffusion, double v_max = 50.0, int samples = 1001);

/// Centered first-difference quotient of the coefficient at v with step h (one-sided at 0).
double finite_difference_slope(const CoefficientSpec& spec, double v, double h);

}  // namespace kslab
