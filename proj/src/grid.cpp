#include "kslab/grid.hpp"

#include "kslab/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace kslab {

std::string to_string(Geometry geometry) {
  return geometry == Geometry::rectangle ? "rectangle" : "radial-disk";
}

Geometry geometry_from_string(const std::string& name) {
  if (name == "rectangle") return Geometry::rectangle;
  if (name == "radial-disk") return Geometry::radial_disk;
  throw PreconditionError("unknown geometry '" + name + "'");
}

std::string to_string(ChemotaxisScheme scheme) {
  return scheme == ChemotaxisScheme::upwind ? "upwind" : "central";
}

ChemotaxisScheme chemotaxis_scheme_from_string(const std::string& name) {
  if (name == "upwind") return ChemotaxisScheme::upwind;
  if (name == "central") return ChemotaxisScheme::central;
  throw PreconditionError("unknown chemotaxis scheme '" + name + "'");
}

// ---------------------------------------------------------------------------
// Grid

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

void add_face(FaceTable& t, std::uint32_t l, std::uint32_t r, double area, double dist,
              double weight) {
  t.left.push_back(l);
  t.right.push_back(r);
  t.area.push_back(area);
  t.distance.push_back(dist);
  t.transmissivity.push_back(area / dist);
  t.dual_weight.push_back(weight);
}

// Half of each neighbouring cell, with the outer half of a boundary cell folded into its
// only interior face, so that the weights of a grid line add up to its full measure.
double dual(double vol_l, bool l_first, double vol_r, bool r_last) {
  return (l_first ? vol_l : 0.5 * vol_l) + (r_last ? vol_r : 0.5 * vol_r);
}

}  // namespace

Grid Grid::rectangle(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
    throw PreconditionError("rectangle lengths must be positive");
  if (nx < 4 || ny < 4) throw PreconditionError("rectangle needs at least 4 cells per direction");
  Grid g;
  g.geometry_ = Geometry::rectangle;
  g.nx_ = nx;
  g.ny_ = ny;
  g.lx_ = lx;
  g.ly_ = ly;
  const double hx = lx / nx;
  const double hy = ly / ny;
  const double vol = hx * hy;
  const auto n = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  g.volumes_ = std::make_shared<const std::vector<double>>(n, vol);

  FaceTable t;
  const std::size_t nfaces = static_cast<std::size_t>(nx - 1) * ny + static_cast<std::size_t>(ny - 1) * nx;
  t.left.reserve(nfaces);
  t.right.reserve(nfaces);
  for (int j = 0; j < ny; ++j) {
    t.runs.push_back({t.left.size(), static_cast<std::size_t>(nx - 1), static_cast<std::uint32_t>(j * nx), 1});
    for (int i = 0; i + 1 < nx; ++i) {
      const auto l = static_cast<std::uint32_t>(j * nx + i);
      add_face(t, l, l + 1, hy, hx, dual(vol, i == 0, vol, i + 2 == nx));
    }
  }
  t.runs.push_back({t.left.size(), static_cast<std::size_t>(ny - 1) * nx, 0, static_cast<std::uint32_t>(nx)});
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const auto l = static_cast<std::uint32_t>(j * nx + i);
      add_face(t, l, l + static_cast<std::uint32_t>(nx), hx, hy, dual(vol, j == 0, vol, j + 2 == ny));
    }
  g.faces_ = std::make_shared<const FaceTable>(std::move(t));
  g.finalize();
  return g;
}

Grid Grid::radial_disk(double radius, int nr) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw PreconditionError("disk radius must be positive");
  if (nr < 4) throw PreconditionError("radial grid needs at least 4 cells");
  Grid g;
  g.geometry_ = Geometry::radial_disk;
  g.nx_ = nr;
  g.ny_ = 1;
  g.lx_ = radius;
  g.ly_ = 0.0;
  const double h = radius / nr;
  std::vector<double> vols(static_cast<std::size_t>(nr));
  for (int i = 0; i < nr; ++i) vols[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * (i + 0.5) * h * h;

  FaceTable t;
  t.runs.push_back({0, static_cast<std::size_t>(nr - 1), 0, 1});
  for (int i = 0; i + 1 < nr; ++i) {
    const double rf = (i + 1) * h;
    add_face(t, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1),
             2.0 * std::numbers::pi * rf, h,
             dual(vols[static_cast<std::size_t>(i)], i == 0, vols[static_cast<std::size_t>(i + 1)], i + 2 == nr));
  }
  g.volumes_ = std::make_shared<const std::vector<double>>(std::move(vols));
  g.faces_ = std::make_shared<const FaceTable>(std::move(t));
  g.finalize();
  return g;
}

void Grid::finalize() {
  double m = 0.0;
  for (double v : *volumes_) m += v;
  measure_ = m;
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, static_cast<std::uint64_t>(geometry_));
  h = fnv1a(h, static_cast<std::uint64_t>(nx_));
  h = fnv1a(h, static_cast<std::uint64_t>(ny_));
  h = fnv1a(h, std::bit_cast<std::uint64_t>(lx_));
  h = fnv1a(h, std::bit_cast<std::uint64_t>(ly_));
  token_ = h;
}

double Grid::x(std::size_t cell) const noexcept {
  const auto i = static_cast<int>(cell % static_cast<std::size_t>(nx_));
  return (i + 0.5) * hx();
}

double Grid::y(std::size_t cell) const noexcept {
  if (geometry_ == Geometry::radial_disk) return 0.0;
  const auto j = static_cast<int>(cell / static_cast<std::size_t>(nx_));
  return (j + 0.5) * hy();
}

// ---------------------------------------------------------------------------
// Field

Field::Field(const Grid& grid, double value) : token_(grid.token()), values_(grid.size(), value) {}

Field::Field(const Grid& grid, std::vector<double> values)
    : token_(grid.token()), values_(std::move(values)) {
  if (values_.size() != grid.size()) throw GridMismatch("field length does not match grid cell count");
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double Field::max() const noexcept {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : values_) m = std::max(m, x);
  return m;
}

double Field::min() const noexcept {
  double m = std::numeric_limits<double>::infinity();
  for (double x : values_) m = std::min(m, x);
  return m;
}

void require_on_grid(const Field& f, const Grid& g, const char* what) {
  if (f.grid_token() != g.token() || f.size() != g.size())
    throw GridMismatch(std::string(what) + ": field does not live on this grid");
}

// ---------------------------------------------------------------------------
// Operators

double integrate(const Field& f, const Grid& g) {
  require_on_grid(f, g, "integrate");
  const auto vol = g.volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * vol[i];
  return s;
}

namespace {

Field finish_divergence(std::vector<double> acc, const Grid& g) {
  const auto vol = g.volumes();
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= vol[i];
  return Field(g, std::move(acc));
}

}  // namespace

Field laplacian_neumann(const Field& f, const Grid& g) {
  require_on_grid(f, g, "laplacian_neumann");
  const FaceTable& t = g.faces();
  std::vector<double> acc(g.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto l = t.left[k];
    const auto r = t.right[k];
    const double flux = t.transmissivity[k] * (f[r] - f[l]);
    acc[l] += flux;
    acc[r] -= flux;
  }
  return finish_divergence(std::move(acc), g);
}

std::vector<double> face_diffusion(const Field& v, const CoefficientSpec& diffusion, const Grid& g,
                                   FaceAveraging averaging) {
  const FaceTable& t = g.faces();
  std::vector<double> d(t.size());
  if (diffusion.is_constant()) {
    const double c = diffusion(0.0);
    if (!(c > 0.0)) throw InvalidCoefficient("diffusion coefficient is not positive", 0.0);
    std::fill(d.begin(), d.end(), c);
    return d;
  }
  // exp(-rate v) is positive but underflows to 0 for large v; that face simply stops diffusing.
  const bool may_underflow =
      diffusion.family() == CoefficientFamily::exponential_decay && diffusion.parameters()[0] > 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double vl = v[t.left[k]];
    const double vr = v[t.right[k]];
    double c;
    if (averaging == FaceAveraging::arithmetic) {
      c = diffusion(0.5 * (vl + vr));
    } else {
      const double a = diffusion(vl);
      const double b = diffusion(vr);
      c = (a > 0.0 && b > 0.0) ? 2.0 * a * b / (a + b) : std::min(a, b);
    }
    if (!(c > 0.0 || (c == 0.0 && may_underflow)) || !std::isfinite(c))
      throw InvalidCoefficient("diffusion coefficient is not positive on a face", 0.5 * (vl + vr));
    d[k] = c;
  }
  return d;
}

std::vector<double> face_velocity(const Field& v, const CoefficientSpec& sensitivity, const Grid& g) {
  const FaceTable& t = g.faces();
  std::vector<double> w(t.size());
  const bool constant = sensitivity.is_constant();
  const double s0 = sensitivity(0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double vl = v[t.left[k]];
    const double vr = v[t.right[k]];
    const double s = constant ? s0 : sensitivity(0.5 * (vl + vr));
    w[k] = s * (vr - vl) / t.distance[k];
  }
  return w;
}

Field diffusive_divergence(const Field& u, const Field& v, const CoefficientSpec& diffusion,
                           const Grid& g, FaceAveraging averaging) {
  require_on_grid(u, g, "diffusive_divergence");
  require_on_grid(v, g, "diffusive_divergence");
  const FaceTable& t = g.faces();
  const auto d = face_diffusion(v, diffusion, g, averaging);
  std::vector<double> acc(g.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto l = t.left[k];
    const auto r = t.right[k];
    const double flux = d[k] * t.transmissivity[k] * (u[r] - u[l]);
    acc[l] += flux;
    acc[r] -= flux;
  }
  return finish_divergence(std::move(acc), g);
}

void accumulate_chemotactic_flux(const Field& u, const Field& v, const CoefficientSpec& sensitivity,
                                 const Grid& g, ChemotaxisScheme scheme, std::span<double> acc) {
  const FaceTable& t = g.faces();
  const bool constant = sensitivity.is_constant();
  const double s0 = sensitivity(0.0);
  const bool upwind = scheme == ChemotaxisScheme::upwind;
  for (const FaceRun& run : t.runs) {
    for (std::size_t q = 0; q < run.count; ++q) {
      const std::size_t k = run.first_face + q;
      const std::size_t l = run.first_left + q;
      const std::size_t r = l + run.stride;
      const double vl = v[l];
      const double vr = v[r];
      const double s = constant ? s0 : sensitivity(0.5 * (vl + vr));
      const double w = s * (vr - vl) / t.distance[k];
      const double uf = upwind ? (w > 0.0 ? u[l] : u[r]) : 0.5 * (u[l] + u[r]);
      const double flux = t.area[k] * uf * w;
      acc[l] += flux;
      acc[r] -= flux;
    }
  }
}

double max_face_rate(const Field& v, const CoefficientSpec& sensitivity, const Grid& g) {
  const FaceTable& t = g.faces();
  const bool constant = sensitivity.is_constant();
  const double s0 = sensitivity(0.0);
  double rate = 0.0;
  for (const FaceRun& run : t.runs) {
    for (std::size_t q = 0; q < run.count; ++q) {
      const std::size_t k = run.first_face + q;
      const std::size_t l = run.first_left + q;
      const double vl = v[l];
      const double vr = v[l + run.stride];
      const double s = constant ? s0 : sensitivity(0.5 * (vl + vr));
      const double h = t.distance[k];
      rate = std::max(rate, std::abs(s * (vr - vl)) / (h * h));
    }
  }
  return rate;
}

Field chemotactic_divergence(const Field& u, const Field& v, const CoefficientSpec& sensitivity,
                             const Grid& g, ChemotaxisScheme scheme) {
  require_on_grid(u, g, "chemotactic_divergence");
  require_on_grid(v, g, "chemotactic_divergence");
  std::vector<double> acc(g.size(), 0.0);
  accumulate_chemotactic_flux(u, v, sensitivity, g, scheme, acc);
  return finish_divergence(std::move(acc), g);
}

double grad_sq_integral(const Field& v, const Grid& g) {
  require_on_grid(v, g, "grad_sq_integral");
  return grad_power_integral(v.values(), g, 2.0);
}

double grad_power_integral(std::span<const double> f, const Grid& g, double r) {
  if (f.size() != g.size()) throw GridMismatch("grad_power_integral: length does not match grid");
  const FaceTable& t = g.faces();
  double s = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double grad = (f[t.right[k]] - f[t.left[k]]) / t.distance[k];
    const double m = r == 2.0 ? grad * grad : std::pow(std::abs(grad), r);
    s += t.dual_weight[k] * m;
  }
  return s;
}

}  // namespace kslab
