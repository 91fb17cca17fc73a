#include "kslab/error.hpp"
#include "kslab/field_io.hpp"
#include "kslab/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace kslab;

namespace {

Field random_field(const Grid& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> f(g.size());
  for (double& x : f) x = d(rng);
  return Field(g, std::move(f));
}

// Neumaier compensated sum of f * V.
double compensated_integral(const Field& f, const Grid& g) {
  double sum = 0.0, c = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f[i] * g.volume(i);
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

Field mirrored_x(const Field& f, const Grid& g) {
  std::vector<double> out(f.size());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out[j * g.nx() + i] = f[j * g.nx() + (g.nx() - 1 - i)];
  return Field(g, std::move(out));
}

Field symmetrized_x(const Field& f, const Grid& g) {
  const Field m = mirrored_x(f, g);
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] + m[i];
  return Field(g, std::move(out));
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

std::vector<Grid> sample_grids() {
  return {Grid::rectangle(1.0, 1.0, 16, 16), Grid::rectangle(2.0, 0.5, 12, 7),
          Grid::radial_disk(1.0, 24)};
}

}  // namespace

TEST_CASE("grid construction") {
  const auto g = Grid::rectangle(1.0, 1.0, 32, 32);
  CHECK(g.size() == 1024);
  CHECK(g.measure() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g.faces().size() == 2 * 31 * 32);
  const auto d = Grid::radial_disk(1.0, 40);
  CHECK(std::abs(d.measure() - std::numbers::pi) <= 1e-12);
  CHECK_THROWS_AS(Grid::rectangle(1.0, 1.0, 3, 8), PreconditionError);
  CHECK_THROWS_AS(Grid::rectangle(-1.0, 1.0, 8, 8), PreconditionError);
  CHECK_THROWS_AS(Grid::radial_disk(0.0, 8), PreconditionError);
  CHECK(Grid::rectangle(1.0, 1.0, 8, 8) == Grid::rectangle(1.0, 1.0, 8, 8));
  CHECK_FALSE(Grid::rectangle(1.0, 1.0, 8, 8) == Grid::rectangle(1.0, 1.0, 8, 9));
}

TEST_CASE("face runs cover the face table") {
  for (const auto& g : sample_grids()) {
    const auto& t = g.faces();
    std::size_t covered = 0;
    for (const auto& run : t.runs) {
      for (std::size_t q = 0; q < run.count; ++q) {
        const std::size_t k = run.first_face + q;
        CHECK(t.left[k] == run.first_left + q);
        CHECK(t.right[k] == t.left[k] + run.stride);
      }
      covered += run.count;
    }
    CHECK(covered == t.size());
  }
}

TEST_CASE("field binding") {
  const auto g = Grid::rectangle(1.0, 1.0, 8, 8);
  const auto h = Grid::rectangle(1.0, 1.0, 8, 9);
  CHECK_THROWS_AS(Field(g, std::vector<double>(10, 1.0)), GridMismatch);
  CHECK_THROWS_AS(laplacian_neumann(Field(h, 1.0), g), GridMismatch);
}

TEST_CASE("integrate") {
  const auto sq = Grid::rectangle(1.0, 1.0, 32, 32);
  CHECK(integrate(Field(sq, 1.0), sq) == doctest::Approx(1.0).epsilon(1e-15));
  const auto disk = Grid::radial_disk(1.0, 64);
  CHECK(std::abs(integrate(Field(disk, 1.0), disk) - std::numbers::pi) <= 1e-12);
  for (const auto& g : sample_grids()) {
    const Field f = random_field(g, 11, -3.0, 5.0);
    CHECK(std::abs(integrate(f, g) - compensated_integral(f, g)) <= 1e-13);
  }
}

TEST_CASE("spatial operators annihilate constants") {
  const auto s_sat = CoefficientSpec::saturating_increasing(0.1, 1.0, 2.0);
  const auto d_exp = CoefficientSpec::exponential_decay(1.0, 0.5);
  for (const auto& g : sample_grids()) {
    const Field c(g, 2.75);
    const Field v = random_field(g, 5);
    CHECK(max_abs(laplacian_neumann(c, g)) == 0.0);
    CHECK(max_abs(diffusive_divergence(c, v, d_exp, g)) == 0.0);
    CHECK(max_abs(chemotactic_divergence(v, c, s_sat, g)) == 0.0);
    CHECK(max_abs(chemotactic_divergence(v, c, s_sat, g, ChemotaxisScheme::central)) == 0.0);
    CHECK(grad_sq_integral(c, g) == 0.0);
    CHECK(max_face_rate(c, s_sat, g) == 0.0);
  }
}

TEST_CASE("divergence operators are conservative") {
  const auto s_sat = CoefficientSpec::saturating_increasing(0.1, 1.0, 2.0);
  const auto d_exp = CoefficientSpec::exponential_decay(1.0, 0.5);
  for (const auto& g : sample_grids()) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const Field u = random_field(g, seed, 0.0, 10.0);
      const Field v = random_field(g, seed + 100, 0.0, 10.0);
      const std::vector<Field> outs = {
          laplacian_neumann(u, g), diffusive_divergence(u, v, d_exp, g),
          diffusive_divergence(u, v, d_exp, g, FaceAveraging::harmonic),
          chemotactic_divergence(u, v, s_sat, g),
          chemotactic_divergence(u, v, s_sat, g, ChemotaxisScheme::central)};
      for (const auto& o : outs) {
        double scale = 0.0;
        for (std::size_t i = 0; i < o.size(); ++i) scale += std::abs(o[i]) * g.volume(i);
        CHECK(std::abs(integrate(o, g)) <= 1e-12 * scale);
      }
    }
  }
}

TEST_CASE("reductions of the divergence operators") {
  for (const auto& g : sample_grids()) {
    const Field u = random_field(g, 21, 0.0, 3.0);
    const Field v = random_field(g, 22, 0.0, 3.0);
    const Field lap_u = laplacian_neumann(u, g);
    const Field d = diffusive_divergence(u, v, CoefficientSpec::constant(2.5), g);
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(d[i] == doctest::Approx(2.5 * lap_u[i]).epsilon(1e-13).scale(1.0));

    const Field lap_v = laplacian_neumann(v, g);
    const Field chi = chemotactic_divergence(Field(g, 1.5), v, CoefficientSpec::constant(0.8), g,
                                             ChemotaxisScheme::central);
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(chi[i] == doctest::Approx(1.5 * 0.8 * lap_v[i]).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("upwind flux takes the donor cell") {
  const auto g = Grid::rectangle(1.0, 1.0, 4, 4);
  std::vector<double> vv(16, 0.0), uu(16, 1.0);
  vv[1] = 1.0;  // cell (1,0) attracts
  uu[0] = 3.0;
  const Field out = chemotactic_divergence(Field(g, uu), Field(g, vv), CoefficientSpec::constant(1.0), g);
  // Face between cells 0 and 1: w = 1 / h > 0, donor is cell 0 with u = 3.
  const double h = 0.25;
  CHECK(out[0] == doctest::Approx(3.0 * (1.0 / h) * h / (h * h)));
}

TEST_CASE("mirror symmetry is preserved") {
  const auto g = Grid::rectangle(1.0, 0.7, 20, 9);
  const Field u = symmetrized_x(random_field(g, 31, 0.0, 2.0), g);
  const Field v = symmetrized_x(random_field(g, 32, 0.0, 2.0), g);
  const auto s_sat = CoefficientSpec::saturating_increasing(0.1, 1.0, 2.0);
  const std::vector<Field> outs = {
      laplacian_neumann(u, g), diffusive_divergence(u, v, CoefficientSpec::exponential_decay(1.0, 1.0), g),
      chemotactic_divergence(u, v, s_sat, g),
      chemotactic_divergence(u, v, s_sat, g, ChemotaxisScheme::central)};
  for (const auto& o : outs) {
    const Field m = mirrored_x(o, g);
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(std::abs(o[i] - m[i]) <= 1e-13 * (1.0 + std::abs(o[i])));
  }
}

TEST_CASE("gradient quadrature") {
  const auto g = Grid::rectangle(1.0, 1.0, 4, 4);
  std::vector<double> x(g.size());
  for (std::size_t c = 0; c < x.size(); ++c) x[c] = g.x(c);
  CHECK(std::abs(grad_sq_integral(Field(g, x), g) - 1.0) <= 1e-12);

  // Face loop written out by rows and columns, boundary half-cells folded inwards.
  const auto r = Grid::rectangle(1.3, 0.9, 11, 7);
  const Field f = random_field(r, 41, -1.0, 1.0);
  const int nx = r.nx(), ny = r.ny();
  const double hx = r.hx(), hy = r.hy(), vol = hx * hy;
  auto weight = [&](int a, int n) { return (a == 0 ? vol : 0.5 * vol) + (a + 2 == n ? vol : 0.5 * vol); };
  double oracle = 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double d = (f[j * nx + i + 1] - f[j * nx + i]) / hx;
      oracle += weight(i, nx) * d * d;
    }
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double d = (f[(j + 1) * nx + i] - f[j * nx + i]) / hy;
      oracle += weight(j, ny) * d * d;
    }
  CHECK(std::abs(grad_sq_integral(f, r) - oracle) <= 1e-13 * oracle);
}

TEST_CASE("maximum face rate") {
  const auto g = Grid::rectangle(1.0, 1.0, 64, 64);
  std::vector<double> v(g.size());
  for (std::size_t c = 0; c < v.size(); ++c) {
    const double dx = g.x(c) - 0.4, dy = g.y(c) - 0.55;
    v[c] = 5.0 * std::exp(-(dx * dx + dy * dy) / 0.02);
  }
  const Field vf(g, v);
  const double h = g.hx();
  double oracle = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      if (i + 1 < 64) oracle = std::max(oracle, std::abs(v[j * 64 + i + 1] - v[j * 64 + i]) / (h * h));
      if (j + 1 < 64) oracle = std::max(oracle, std::abs(v[(j + 1) * 64 + i] - v[j * 64 + i]) / (h * h));
    }
  CHECK(max_face_rate(vf, CoefficientSpec::constant(1.0), g) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK(max_face_rate(vf, CoefficientSpec::constant(2.0), g) ==
        doctest::Approx(2.0 * oracle).epsilon(1e-14));
}

TEST_CASE("radial reduction agrees with the planar operator") {
  // Radial Gaussian on a disk versus the same profile on a square holding the disk.
  const double sigma = 0.2;
  auto profile = [&](double r) { return std::exp(-r * r / (2.0 * sigma * sigma)); };
  auto mismatch = [&](int n) {
    const auto disk = Grid::radial_disk(1.0, n);
    std::vector<double> fr(disk.size());
    for (std::size_t c = 0; c < fr.size(); ++c) fr[c] = profile(disk.x(c));
    const Field lr = laplacian_neumann(Field(disk, fr), disk);

    const auto sq = Grid::rectangle(2.0, 2.0, 2 * n, 2 * n);
    std::vector<double> fs(sq.size());
    for (std::size_t c = 0; c < fs.size(); ++c) fs[c] = profile(std::hypot(sq.x(c) - 1.0, sq.y(c) - 1.0));
    const Field ls = laplacian_neumann(Field(sq, fs), sq);

    const double h = 1.0 / n;
    double worst = 0.0;
    for (std::size_t c = 0; c < fs.size(); ++c) {
      const double r = std::hypot(sq.x(c) - 1.0, sq.y(c) - 1.0);
      if (r > 0.6 || r < h) continue;
      const double s = r / h - 0.5;
      const auto i = static_cast<std::size_t>(std::floor(s));
      const double a = s - static_cast<double>(i);
      const double radial = (1.0 - a) * lr[i] + a * lr[i + 1];
      worst = std::max(worst, std::abs(radial - ls[c]));
    }
    return worst;
  };
  const double coarse = mismatch(40);
  const double fine = mismatch(80);
  CHECK(coarse < 2.0);  // |Lap f| reaches 2 / sigma^2 = 50
  CHECK(coarse / fine > 1.8);
}

TEST_CASE("diffusion faces") {
  const auto g = Grid::rectangle(1.0, 1.0, 8, 8);
  const Field v = random_field(g, 51, 0.0, 2.0);
  const auto d = CoefficientSpec::exponential_decay(1.0, 1.0);
  const auto arith = face_diffusion(v, d, g, FaceAveraging::arithmetic);
  const auto harm = face_diffusion(v, d, g, FaceAveraging::harmonic);
  const auto& t = g.faces();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double vl = v[t.left[k]], vr = v[t.right[k]];
    CHECK(arith[k] == doctest::Approx(std::exp(-0.5 * (vl + vr))));
    const double a = std::exp(-vl), b = std::exp(-vr);
    CHECK(harm[k] == doctest::Approx(2.0 * a * b / (a + b)));
  }
  CHECK_THROWS_AS(face_diffusion(v, CoefficientSpec::constant(0.0), g, FaceAveraging::arithmetic),
                  InvalidCoefficient);
  CHECK_THROWS_AS(face_diffusion(v, CoefficientSpec::tabulated({0.0, 1.0, 2.0}, {1.0, -1.0, -2.0}), g,
                                 FaceAveraging::arithmetic),
                  InvalidCoefficient);
  // exp(-v) underflows for very large v; such faces carry no diffusion instead of failing.
  const auto big = face_diffusion(Field(g, 1e4), d, g, FaceAveraging::arithmetic);
  CHECK(*std::max_element(big.begin(), big.end()) == 0.0);
}

TEST_CASE("snapshot round trip is bit-identical") {
  for (const auto& g : sample_grids()) {
    const Field f = random_field(g, 61, -1e3, 1e3);
    std::stringstream buf;
    write_snapshot(buf, f, g, 0.125);
    const Snapshot s = read_snapshot(buf);
    CHECK(s.t == 0.125);
    CHECK(s.values == f.data());
    CHECK(s.geometry == g.geometry());
  }
  std::stringstream bad("KSFIELD v9 rectangle 4 4 0\n");
  CHECK_THROWS(read_snapshot(bad));
}
