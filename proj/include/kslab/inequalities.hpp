#pragma once

#include "kslab/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace kslab {

enum class EnsembleKind { band_limited_trig, gaussian_bumps, two_valued, worst_case_spike };
std::string to_string(EnsembleKind kind);
EnsembleKind ensemble_kind_from_string(const std::string& name);

/// Reproducible family of nonnegative test fields on a grid.
struct FieldEnsemble {
  Grid grid;
  EnsembleKind kind{EnsembleKind::band_limited_trig};
  int count{100};
  std::uint64_t seed{0};

  /// Member `index`, identical for identical (grid, kind, seed, index).
  std::vector<double> member(int index) const;
  std::vector<std::vector<double>> generate() const;
  /// Same generator and grid, disjoint seed stream.
  FieldEnsemble fresh() const;
  std::string describe() const;
};

/// Discrete L^q norm (sum V |f|^q)^{1/q}.
double discrete_norm(std::span<const double> f, const Grid& g, double q);
/// Discrete ||grad f||_{L^r} built from the solver's face differences.
double discrete_grad_norm(std::span<const double> f, const Grid& g, double r);

/// Revalidation slack applied to every fitted constant.
inline constexpr double kRevalidationSlack = 1.5;

/**
 * Outcome of fitting the smallest constant that makes an inequality hold on an ensemble
 * and re-checking it, multiplied by kRevalidationSlack, on a fresh-seed ensemble.
 */
struct InequalityReport {
  std::string lemma;
  nlohmann::json parameters;
  std::string ensemble;
  double fitted_constant{0.0};
  double min_margin{0.0};           ///< min over revalidation cases of rhs - lhs
  double min_relative_margin{0.0};  ///< same, divided by rhs
  nlohmann::json witness;           ///< tightest revalidation case
  bool passed{false};

  nlohmann::json to_json() const;
};

/// GN exponent a = (1/q - 1/p) / (1/q + 1/2 - 1/r) in two dimensions.
double gn_exponent(double p, double q, double r);

/// ||f||_p^p <= C (||grad f||_r^{pa} ||f||_q^{p(1-a)} + ||f||_s^p).
/// Throws PreconditionError unless r >= 1, 0 < q <= p, s > 0 and a lies in [0, 1].
InequalityReport check_gn(const FieldEnsemble& e, double p, double q, double r, double s);

struct GnTerms {
  double lhs{0.0};      ///< ||f||_p^p
  double bracket{0.0};  ///< ||grad f||_r^{pa} ||f||_q^{p(1-a)} + ||f||_s^p
};
GnTerms gn_terms(std::span<const double> f, const Grid& g, double p, double q, double r, double s);

struct EtaTerms {
  double lhs{0.0};      ///< integral f^2
  double bracket{0.0};  ///< eta integral |grad f|^2 + (integral |f|)^2 / eta
};
EtaTerms eta_terms(std::span<const double> f, const Grid& g, double eta);

/// integral f^2 <= C eta integral |grad f|^2 + (C / eta) (integral |f|)^2, one C for all eta.
InequalityReport check_eta_interpolation(const FieldEnsemble& e, const std::vector<double>& etas);

enum class Gauge { log_shift, square_root, identity };  ///< ln(s+e), s^{1/2}, s
std::string to_string(Gauge gauge);
Gauge gauge_from_string(const std::string& name);
double eval_gauge(Gauge gauge, double s);

/// Cutoff: 0 on |s| <= N, 2(|s| - N) on N < |s| <= 2N, |s| beyond.
double truncation_cutoff(double s, double n);

struct TruncationReport {
  double q{0.0};
  double level{0.0};  ///< N
  Gauge gauge{Gauge::log_shift};
  bool branch_identities{true};  ///< 0 <= xi(u) <= u and u - xi(u) <= 2N at every cell
  double first_lhs{0.0};         ///< integral |u - xi(u)|^{q+1}
  double first_rhs{0.0};         ///< (2N)^q integral u
  double second_lhs{0.0};        ///< integral xi(u)
  double second_rhs{0.0};        ///< integral u G(u) / G(N)
  // Pieces of the assembled inequality
  //   integral u^{q+1} <= c grad_term + mass_term + tail_term
  // with c fitted and the mass constant fixed at the Jensen value |Omega|^{-q}.
  double assembled_lhs{0.0};  ///< integral u^{q+1}
  double grad_term{0.0};      ///< integral |grad u^{q/2}|^2 * integral u G(u) / G(N)
  double mass_term{0.0};      ///< (integral u)^{q+1} / |Omega|^q
  double tail_term{0.0};      ///< 2^q (2N)^q integral u

  bool first_holds() const noexcept { return first_lhs <= first_rhs; }
  bool second_holds() const noexcept { return second_lhs <= second_rhs; }
  bool proof_steps_hold() const noexcept {
    return branch_identities && first_holds() && second_holds();
  }
  nlohmann::json to_json() const;
};

/// Throws PreconditionError for N <= 0, q <= 0 or negative u.
TruncationReport check_truncation(std::span<const double> u, const Grid& g, double q, double level,
                                  Gauge gauge = Gauge::log_shift);
TruncationReport check_truncation(const Field& u, const Grid& g, double q, double level,
                                  Gauge gauge = Gauge::log_shift);

/// Fits c in the assembled truncation inequality over ensemble x levels (epsilon = c / G(N)),
/// and revalidates with slack on a fresh ensemble. Fails if any proof step fails on any case.
InequalityReport check_truncation_ensemble(const FieldEnsemble& e, double q,
                                           const std::vector<double>& levels,
                                           Gauge gauge = Gauge::log_shift);

struct SequenceReport {
  std::vector<double> iterates;  ///< u_1 .. u_{K+1}
  double sup{0.0};
  double bound{0.0};  ///< (sum a)(prod b) + (prod b) u_1
  bool holds{false};  ///< sup <= bound (1 + 1e-12)
  nlohmann::json to_json() const;
};

/// Iterates u_{k+1} = a_k + b_k u_k for k = 1..K and compares with the closed bound.
/// Throws PreconditionError if some a_k < 0, b_k < 1, u_1 <= 0 or partial sums overflow.
SequenceReport check_sequence_lemma(const std::vector<double>& a, const std::vector<double>& b,
                                    double u1);

struct RandomizedSequenceSummary {
  int trials{0};
  int failures{0};
  double max_ratio{0.0};  ///< max over trials of sup / bound
  nlohmann::json to_json() const;
};
RandomizedSequenceSummary check_sequence_lemma_randomized(int trials, std::uint64_t seed, int length = 40);

struct LogDominationEntry {
  double epsilon{0.0};
  double c{0.0};       ///< sup_u of u^{a1} ln^{b1}(u+e) - eps u^{a2} ln^{b2}(u+e)
  double argmax{0.0};
  bool finite{false};  ///< tail certified negative and decreasing
};

struct LogDominationReport {
  double a1{0.0}, b1{0.0}, a2{0.0}, b2{0.0};
  std::vector<LogDominationEntry> entries;
  bool passed() const noexcept;
  nlohmann::json to_json() const;
};

/// Throws PreconditionError unless a1 < a2 and all epsilons are positive.
LogDominationReport check_log_domination(double a1, double b1, double a2, double b2,
                                         const std::vector<double>& u_grid,
                                         const std::vector<double>& epsilons);

}  // namespace kslab
