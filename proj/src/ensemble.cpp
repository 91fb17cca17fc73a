#include "kslab/error.hpp"
#include "kslab/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kslab {

namespace {

constexpr std::uint64_t kFreshOffset = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + kFreshOffset * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double mode(const Grid& g, std::size_t c, int m, int n) {
  constexpr double pi = std::numbers::pi;
  if (g.geometry() == Geometry::radial_disk) return std::cos(m * pi * g.x(c) / g.radius());
  return std::cos(m * pi * g.x(c) / g.lx()) * std::cos(n * pi * g.y(c) / g.ly());
}

std::vector<double> band_limited(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  constexpr int kModes = 4;
  const int ny_modes = g.geometry() == Geometry::radial_disk ? 0 : kModes;
  std::vector<double> f(g.size(), 0.0);
  for (int m = 0; m <= kModes; ++m) {
    for (int n = 0; n <= ny_modes; ++n) {
      const double a = unit(rng) / (1.0 + m + n);
      for (std::size_t c = 0; c < f.size(); ++c) f[c] += a * mode(g, c, m, n);
    }
  }
  const double lo = *std::min_element(f.begin(), f.end());
  const double lift = 0.5 * (1.0 + unit(rng));
  for (double& x : f) x += lift - lo;
  return f;
}

std::vector<double> bumps(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const bool radial = g.geometry() == Geometry::radial_disk;
  const double scale = radial ? g.radius() : std::min(g.lx(), g.ly());
  const int count = 1 + static_cast<int>(u01(rng) * 4.0);
  std::vector<double> f(g.size(), 0.1 * u01(rng));
  for (int b = 0; b < count; ++b) {
    const double cx = radial ? 0.0 : u01(rng) * g.lx();
    const double cy = radial ? 0.0 : u01(rng) * g.ly();
    const double sigma = (0.03 + 0.17 * u01(rng)) * scale;
    const double height = 0.5 + 1.5 * u01(rng);
    for (std::size_t c = 0; c < f.size(); ++c) {
      const double dx = g.x(c) - cx;
      const double dy = g.y(c) - cy;
      f[c] += height * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  }
  return f;
}

std::vector<double> two_valued(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double a = 2.0 * u01(rng);
  const double b = 2.0 * u01(rng) + 0.1;
  const int m = 1 + static_cast<int>(u01(rng) * 3.0);
  const int n = static_cast<int>(u01(rng) * 3.0);
  const double shift = 0.8 * (u01(rng) - 0.5);
  std::vector<double> f(g.size());
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = mode(g, c, m, n) > shift ? a : b;
  return f;
}

std::vector<double> spike(const Grid& g, std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> f(g.size());
  const double floor_level = 0.01 * u01(rng);
  for (double& x : f) x = floor_level * (1.0 + 0.1 * u01(rng));
  std::size_t at = 0;
  if (g.geometry() == Geometry::radial_disk) {
    switch (index % 3) {
      case 0: at = 0; break;
      case 1: at = g.size() - 1; break;
      default: at = static_cast<std::size_t>(u01(rng) * g.size()) % g.size();
    }
  } else {
    const int nx = g.nx();
    const int ny = g.ny();
    int i = 0, j = 0;
    switch (index % 3) {
      case 0:
        i = (index / 3) % 2 == 0 ? 0 : nx - 1;
        j = (index / 6) % 2 == 0 ? 0 : ny - 1;
        break;
      case 1:
        i = static_cast<int>(u01(rng) * nx) % nx;
        j = (index / 3) % 2 == 0 ? 0 : ny - 1;
        break;
      default:
        i = 1 + static_cast<int>(u01(rng) * (nx - 2)) % (nx - 2);
        j = 1 + static_cast<int>(u01(rng) * (ny - 2)) % (ny - 2);
    }
    at = static_cast<std::size_t>(j) * nx + i;
  }
  f[at] += 1.0 + 99.0 * u01(rng);
  return f;
}

}  // namespace

std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::band_limited_trig: return "band-limited-trig";
    case EnsembleKind::gaussian_bumps: return "gaussian-bumps";
    case EnsembleKind::two_valued: return "two-valued";
    case EnsembleKind::worst_case_spike: return "worst-case-spike";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
  if (name == "band-limited-trig") return EnsembleKind::band_limited_trig;
  if (name == "gaussian-bumps") return EnsembleKind::gaussian_bumps;
  if (name == "two-valued") return EnsembleKind::two_valued;
  if (name == "worst-case-spike") return EnsembleKind::worst_case_spike;
  throw PreconditionError("unknown ensemble generator '" + name + "'");
}

std::vector<double> FieldEnsemble::member(int index) const {
  if (index < 0 || index >= count) throw PreconditionError("ensemble index out of range");
  std::mt19937_64 rng(mix(seed, static_cast<std::uint64_t>(index)));
  switch (kind) {
    case EnsembleKind::band_limited_trig: return band_limited(grid, rng);
    case EnsembleKind::gaussian_bumps: return bumps(grid, rng);
    case EnsembleKind::two_valued: return two_valued(grid, rng);
    case EnsembleKind::worst_case_spike: return spike(grid, rng, index);
  }
  return {};
}

std::vector<std::vector<double>> FieldEnsemble::generate() const {
  if (count <= 0) throw PreconditionError("ensemble count must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(member(i));
  return out;
}

FieldEnsemble FieldEnsemble::fresh() const {
  FieldEnsemble e = *this;
  e.seed = mix(seed ^ 0x5bd1e995ULL, 0xfeedULL);
  return e;
}

std::string FieldEnsemble::describe() const {
  std::string shape = grid.geometry() == Geometry::radial_disk
                          ? "radial-disk " + std::to_string(grid.nx())
                          : "rectangle " + std::to_string(grid.nx()) + "x" + std::to_string(grid.ny());
  return to_string(kind) + " x" + std::to_string(count) + " on " + shape + " seed " +
         std::to_string(seed);
}

}  // namespace kslab
