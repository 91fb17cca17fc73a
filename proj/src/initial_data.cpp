#include "kslab/initial_data.hpp"

#include "kslab/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace kslab {

namespace {

double cosine_mode(const Grid& g, std::size_t c, const CosineMode& m) {
  constexpr double pi = std::numbers::pi;
  if (g.geometry() == Geometry::radial_disk) return std::cos(m.m * pi * g.x(c) / g.radius());
  return std::cos(m.m * pi * g.x(c) / g.lx()) * std::cos(m.n * pi * g.y(c) / g.ly());
}

}  // namespace

std::pair<Field, Field> make_initial_data(const InitialDataSpec& spec, const Grid& g, std::uint64_t seed) {
  std::vector<double> u(g.size(), 0.0);
  const double base = spec.mass ? *spec.mass / g.measure() : spec.value;

  switch (spec.kind) {
    case InitialKind::constant:
      std::fill(u.begin(), u.end(), base);
      break;
    case InitialKind::perturbed_constant: {
      if (!(spec.amplitude >= 0.0 && spec.amplitude < 1.0)) {
        throw PreconditionError("perturbation amplitude must lie in [0, 1)");
      }
      std::vector<double> coeff(spec.modes.size(), 1.0);
      if (spec.random_coefficients) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (double& a : coeff) a = dist(rng);
      }
      double total = 0.0;
      for (double a : coeff) total += std::abs(a);
      if (total > 0.0) {
        for (double& a : coeff) a /= total;
      }
      for (std::size_t c = 0; c < u.size(); ++c) {
        double wave = 0.0;
        for (std::size_t k = 0; k < spec.modes.size(); ++k) wave += coeff[k] * cosine_mode(g, c, spec.modes[k]);
        u[c] = spec.amplitude == 0.0 ? base : base * (1.0 + spec.amplitude * wave);
      }
      break;
    }
    case InitialKind::gaussian_bumps: {
      if (!spec.mass) throw PreconditionError("gaussian initial data requires a target mass");
      for (const auto& b : spec.bumps) {
        const double s2 = 2.0 * b.sigma * b.sigma;
        for (std::size_t c = 0; c < u.size(); ++c) {
          const double dx = g.x(c) - b.cx;
          const double dy = g.y(c) - b.cy;
          u[c] += b.weight * std::exp(-(dx * dx + dy * dy) / s2);
        }
      }
      double m = 0.0;
      for (std::size_t c = 0; c < u.size(); ++c) m += g.volume(c) * u[c];
      if (!(m > 0.0)) throw PreconditionError("initial data must not be identically zero");
      const double scale = *spec.mass / m;
      for (double& x : u) x *= scale;
      break;
    }
  }

  bool any = false;
  for (double x : u) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw PreconditionError("initial density must be nonnegative and finite");
    any = any || x > 0.0;
  }
  if (!any) throw PreconditionError("initial data must not be identically zero");

  Field u0(g, std::move(u));
  Field v0 = spec.v0_same ? u0 : Field(g, spec.v0_value);
  if (!spec.v0_same && !(spec.v0_value >= 0.0)) throw PreconditionError("initial concentration must be nonnegative");
  return {std::move(u0), std::move(v0)};
}

}  // namespace kslab
