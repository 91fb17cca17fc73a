#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace kslab;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

Field random_field(const Grid& g, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> f(g.size());
  for (double& x : f) x = d(rng);
  return Field(g, std::move(f));
}

DiagnosticsRecord rec(double t, double density) {
  DiagnosticsRecord r;
  r.t = t;
  r.dissipation_density = density;
  return r;
}

// Exact integral of the piecewise-linear interpolant over [a, b], segment by segment.
double linear_integral(const std::vector<DiagnosticsRecord>& s, double a, double b) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double lo = std::max(a, s[i].t), hi = std::min(b, s[i + 1].t);
    if (hi <= lo) continue;
    auto value = [&](double t) {
      const double w = (t - s[i].t) / (s[i + 1].t - s[i].t);
      const double g0 = s[i].dissipation_density + s[i].lap_v_sq;
      const double g1 = s[i + 1].dissipation_density + s[i + 1].lap_v_sq;
      return g0 + w * (g1 - g0);
    };
    total += 0.5 * (value(lo) + value(hi)) * (hi - lo);
  }
  return total;
}

}  // namespace

TEST_CASE("energy functional") {
  const auto g = Grid::rectangle(1.0, 1.0, 16, 16);
  CHECK(energy_y(State(g, Field(g, 0.0), Field(g, 0.0)), 1.0) == 0.0);

  const double oracle = static_cast<double>(boost::multiprecision::log(big(1) + boost::multiprecision::exp(big(1))));
  CHECK(std::abs(energy_y(State(g, Field(g, 1.0), Field(g, 0.0)), 1.0) - oracle) <= 1e-13);

  const State s(g, random_field(g, 3, 0.0, 20.0), random_field(g, 4, 0.0, 5.0));
  CHECK(energy_y(s, 0.0) == integrate(s.u, g) + 0.5 * grad_sq_integral(s.v, g));

  for (double k : {0.5, 1.0, 1.5}) {
    big e = 0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const big u(s.u[i]);
      e += big(g.volume(i)) * u *
           boost::multiprecision::pow(boost::multiprecision::log(u + boost::multiprecision::exp(big(1))), big(k));
    }
    const double want = static_cast<double>(e) + 0.5 * grad_sq_integral(s.v, g);
    CHECK(std::abs(energy_y(s, k) - want) <= 1e-12 * want);
  }
}

TEST_CASE("dissipation density") {
  const auto g = Grid::rectangle(1.0, 1.0, 12, 12);
  const Field u = random_field(g, 5, 0.0, 8.0);
  double want = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    want += g.volume(i) * u[i] * u[i] * std::pow(std::log(u[i] + std::numbers::e), 1.5 - 0.4);
  CHECK(dissipation_density(u, g, 1.5, 0.4) == doctest::Approx(want).epsilon(1e-13));
  CHECK(dissipation_density(Field(g, 2.0), g, 1.0, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("dissipation window") {
  std::vector<DiagnosticsRecord> flat;
  for (int i = 0; i <= 8; ++i) flat.push_back(rec(0.25 * i, 3.0));
  CHECK(dissipation_window(flat, 1.0) == 3.0);

  std::vector<DiagnosticsRecord> two = {rec(0.0, 1.0), rec(2.0, 5.0)};
  CHECK(dissipation_window(two, 2.0) == doctest::Approx(6.0));

  std::vector<DiagnosticsRecord> saw;
  for (int i = 0; i <= 60; ++i) {
    DiagnosticsRecord r = rec(0.05 * i + 0.001 * (i % 3), static_cast<double>(i % 7));
    r.lap_v_sq = 0.5 * (i % 4);
    saw.push_back(r);
  }
  const double tau = 0.73;
  double oracle = 0.0;
  for (const auto& start : saw)
    if (start.t + tau <= saw.back().t) oracle = std::max(oracle, linear_integral(saw, start.t, start.t + tau));
  CHECK(dissipation_window(saw, tau) == doctest::Approx(oracle).epsilon(1e-13));

  CHECK_THROWS_AS(dissipation_window(two, 3.0), WindowTooShort);
  CHECK_THROWS_AS(dissipation_window(std::vector<DiagnosticsRecord>{rec(0.0, 1.0)}, 0.1), WindowTooShort);
  CHECK_THROWS_AS(dissipation_window(two, 0.0), PreconditionError);
}

TEST_CASE("Lq norms") {
  const auto g = Grid::rectangle(2.0, 1.0, 16, 8);
  const double measure = 2.0;
  for (double q : {2.0, 4.0, 8.0}) CHECK(lq_norm(Field(g, 3.0), g, q) == doctest::Approx(3.0 * std::pow(measure, 1.0 / q)));

  std::vector<double> two(g.size());
  for (std::size_t c = 0; c < two.size(); ++c) two[c] = c < two.size() / 2 ? 1.5 : 4.0;
  for (double q : {3.0, 4.0, 16.0}) {
    const double want = std::pow((std::pow(1.5, q) + std::pow(4.0, q)) / 2.0, 1.0 / q) * std::pow(measure, 1.0 / q);
    CHECK(lq_norm(Field(g, two), g, q) == doctest::Approx(want).epsilon(1e-14));
  }

  const Field u = random_field(g, 7, 0.0, 50.0);
  for (double q : {4.0, 8.0}) {
    big s = 0;
    for (std::size_t i = 0; i < u.size(); ++i) s += big(g.volume(i)) * boost::multiprecision::pow(big(u[i]), big(q));
    const double want = static_cast<double>(boost::multiprecision::pow(s, big(1) / big(q)));
    CHECK(std::abs(lq_norm(u, g, q) - want) <= 1e-10 * want);
  }
}

TEST_CASE("Moser ladder") {
  const auto g = Grid::rectangle(1.0, 1.0, 32, 32);
  const auto c = moser_ladder(Field(g, 2.5), g, 4.0, 4);
  REQUIRE(c.rungs.size() == 5);
  for (const auto& r : c.rungs) CHECK(r.normalized == doctest::Approx(2.5));

  std::vector<double> smooth(g.size());
  for (std::size_t i = 0; i < smooth.size(); ++i) {
    const double dx = g.x(i) - 0.5, dy = g.y(i) - 0.5;
    smooth[i] = 1.0 + 4.0 * std::exp(-(dx * dx + dy * dy) / 2.0);
  }
  const auto l = moser_ladder(Field(g, smooth), g, 4.0, 4);
  CHECK(l.rungs.back().q == 64.0);
  for (std::size_t j = 1; j < l.rungs.size(); ++j) CHECK(l.rungs[j].normalized >= l.rungs[j - 1].normalized);
  for (const auto& r : l.rungs) CHECK(r.normalized <= l.sup * (1.0 + 1e-14));
  CHECK(l.rungs.back().normalized >= 0.95 * l.sup);

  CHECK_THROWS_AS(moser_ladder(Field(g, 1.0), g, 2.0, 3), PreconditionError);
  CHECK_THROWS_AS(moser_ladder(Field(g, -1.0), g, 4.0, 3), PreconditionError);
}

TEST_CASE("blow-up detection") {
  const auto g = Grid::rectangle(1.0, 1.0, 8, 8);
  const DiagnosticsConfig d;
  Field spike(g, 1.0);
  spike[10] = 1e7;
  const auto t = detect_blowup(State(g, spike, Field(g, 1.0)), d, 1e-4);
  CHECK(t.flagged);
  CHECK(t.reason == BlowupReason::threshold);

  CHECK_FALSE(detect_blowup(State(g, Field(g, 5.0), Field(g, 5.0)), d, 1e-3).flagged);

  Field nan(g, 1.0);
  nan[3] = std::numeric_limits<double>::quiet_NaN();
  const auto n = detect_blowup(State(g, nan, Field(g, 1.0)), d, 1e-3);
  CHECK(n.flagged);
  CHECK(n.reason == BlowupReason::nonfinite);

  CHECK(detect_blowup(State(g, Field(g, 5.0), Field(g, 5.0)), d, 1e-14).reason == BlowupReason::dt_collapse);
}

TEST_CASE("blow-up detection is monotone") {
  // A state with larger sup u and smaller dt than a flagged one is flagged as well.
  const auto g = Grid::rectangle(1.0, 1.0, 8, 8);
  DiagnosticsConfig d;
  d.blowup_max_u = 100.0;
  d.blowup_dt_floor = 1e-6;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lsup(0.0, 3.0), ldt(-8.0, -4.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double s1 = std::pow(10.0, lsup(rng)), s2 = std::pow(10.0, lsup(rng));
    const double dt1 = std::pow(10.0, ldt(rng)), dt2 = std::pow(10.0, ldt(rng));
    const bool f1 = detect_blowup(State(g, Field(g, s1), Field(g, 1.0)), d, dt1).flagged;
    const bool f2 = detect_blowup(State(g, Field(g, s2), Field(g, 1.0)), d, dt2).flagged;
    if (s2 >= s1 && dt2 <= dt1 && f1) CHECK(f2);
  }
}

TEST_CASE("measure and csv rows agree on column count") {
  const auto g = Grid::rectangle(1.0, 1.0, 8, 8);
  DiagnosticsConfig d;
  const State s(g, random_field(g, 13, 0.0, 2.0), random_field(g, 14, 0.0, 2.0));
  const auto r = measure(s, d, 0.5);
  CHECK(r.lq_norms.size() == d.q_list.size());
  const auto header = csv_header(d.q_list);
  const auto row = csv_row(r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(r.energy_y == doctest::Approx(energy_y(s, d.k)).epsilon(1e-14));
}

TEST_CASE("diagnostics configuration") {
  DiagnosticsConfig d;
  CHECK_NOTHROW(d.validate());
  d.k = 0.0;
  CHECK_THROWS_AS(d.validate(), PreconditionError);
  DiagnosticsConfig w;
  w.k = 1.0;
  CHECK(w.admissibility_warnings(Regime::nondegenerate, 0.5).empty());
  CHECK_FALSE(w.admissibility_warnings(Regime::degenerate, 0.4).empty());
  w.k = 1.5;
  CHECK(w.admissibility_warnings(Regime::degenerate, 0.4).empty());
  CHECK(default_energy_exponent(Regime::degenerate) == 1.5);
  CHECK(default_energy_exponent(Regime::nondegenerate) == 1.0);
}
