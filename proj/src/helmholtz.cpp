#include "kslab/helmholtz.hpp"

#include "kslab/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace kslab {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Solver scratch, reused across calls on the same thread.
struct Workspace {
  std::vector<double> conductance, diag_mass, inv_diag, b, r, z, p, ap, flux;
};

Workspace& workspace() {
  thread_local Workspace w;
  return w;
}

struct WeightedOperator {
  const Grid& g;
  std::vector<double>& conductance;  // c_f * area_f / h_f
  std::vector<double>& diag_mass;    // V_i (1 + alpha_i)
  std::vector<double>& inv_diag;     // inverse of the full diagonal, for the preconditioner
  std::vector<double>& scratch;      // per-run face fluxes

  WeightedOperator(const Grid& grid, std::span<const double> face_coeff, std::span<const double> alpha,
                   Workspace& w)
      : g(grid), conductance(w.conductance), diag_mass(w.diag_mass), inv_diag(w.inv_diag), scratch(w.flux) {
    const FaceTable& t = g.faces();
    const auto vol = g.volumes();
    const std::size_t n = g.size();
    diag_mass.resize(n);
    inv_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!(alpha[i] >= 0.0)) throw PreconditionError("helmholtz: alpha must be >= 0");
      diag_mass[i] = vol[i] * (1.0 + alpha[i]);
      inv_diag[i] = diag_mass[i];
    }
    conductance.resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!(face_coeff[k] >= 0.0)) throw PreconditionError("helmholtz: face coefficients must be >= 0");
      const double c = face_coeff[k] * t.transmissivity[k];
      conductance[k] = c;
      inv_diag[t.left[k]] += c;
      inv_diag[t.right[k]] += c;
    }
    for (double& d : inv_diag) d = 1.0 / d;
    std::size_t longest = 0;
    for (const FaceRun& run : t.runs) longest = std::max(longest, run.count);
    scratch.resize(longest);
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = diag_mass[i] * x[i];
    for (const FaceRun& run : g.faces().runs) {
      const double* __restrict c = conductance.data() + run.first_face;
      const double* __restrict xl = x.data() + run.first_left;
      const double* __restrict xr = xl + run.stride;
      double* __restrict flux = scratch.data();
      for (std::size_t q = 0; q < run.count; ++q) flux[q] = c[q] * (xl[q] - xr[q]);
      double* yl = y.data() + run.first_left;
      for (std::size_t q = 0; q < run.count; ++q) yl[q] += flux[q];
      double* yr = yl + run.stride;
      for (std::size_t q = 0; q < run.count; ++q) yr[q] -= flux[q];
    }
  }
};

}  // namespace

void apply_helmholtz(const Grid& g, std::span<const double> face_coeff, std::span<const double> alpha,
                     std::span<const double> x, std::span<double> y) {
  Workspace w;
  WeightedOperator(g, face_coeff, alpha, w).apply(x, y);
}

SolveStats solve_helmholtz(const Grid& g, std::span<const double> face_coeff,
                           std::span<const double> alpha, std::span<const double> rhs,
                           std::span<double> x, double tol, int max_iters) {
  const std::size_t n = g.size();
  if (face_coeff.size() != g.faces().size() || alpha.size() != n || rhs.size() != n || x.size() != n)
    throw GridMismatch("solve_helmholtz: argument sizes do not match the grid");
  if (!(tol > 0.0)) throw PreconditionError("solve_helmholtz: tol must be positive");

  Workspace& ws = workspace();
  const WeightedOperator op(g, face_coeff, alpha, ws);
  const auto vol = g.volumes();
  std::vector<double>& b = ws.b;
  std::vector<double>& r = ws.r;
  std::vector<double>& z = ws.z;
  std::vector<double>& p = ws.p;
  std::vector<double>& ap = ws.ap;
  b.resize(n);
  r.resize(n);
  z.resize(n);
  p.resize(n);
  ap.resize(n);

  double b_norm1 = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = vol[i] * rhs[i];
    b_norm1 += std::abs(b[i]);
    bb += b[i] * b[i];
  }
  const double b_norm2 = std::sqrt(bb);
  if (b_norm2 == 0.0) {
    for (auto& xi : x) xi = 0.0;
    return {0, 0.0};
  }

  // r = b - A x, returning (r.r, sum r).
  auto true_residual = [&] {
    op.apply(x, ap);
    double rr = 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = b[i] - ap[i];
      rr += r[i] * r[i];
      sum += r[i];
    }
    return std::pair{rr, sum};
  };
  auto converged = [&](double rr, double sum) {
    return std::sqrt(rr) <= tol * b_norm2 && std::abs(sum) <= tol * b_norm1;
  };

  auto [rr, sum] = true_residual();
  bool residual_is_true = true;
  int it = 0;
  int restarts = 0;
  while (true) {
    if (converged(rr, sum)) {
      // Confirm on the true residual; the recursive one drifts.
      if (!residual_is_true) {
        std::tie(rr, sum) = true_residual();
        residual_is_true = true;
      }
      if (converged(rr, sum) || restarts >= 3) break;
      ++restarts;
    }
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = r[i] * op.inv_diag[i];
      p[i] = z[i];
      rz += r[i] * z[i];
    }
    bool done = false;
    while (!done) {
      if (it >= max_iters) {
        std::ostringstream os;
        os << "conjugate gradients stalled after " << it
           << " iterations, relative residual " << std::sqrt(rr) / b_norm2;
        throw SolverStall(os.str(), std::sqrt(rr) / b_norm2, it);
      }
      op.apply(p, ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double a = rz / pap;
      rr = 0.0;
      sum = 0.0;
      double rz_new = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += a * p[i];
        r[i] -= a * ap[i];
        rr += r[i] * r[i];
        sum += r[i];
        z[i] = r[i] * op.inv_diag[i];
        rz_new += r[i] * z[i];
      }
      ++it;
      residual_is_true = false;
      if (converged(rr, sum)) {
        done = true;
        break;
      }
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (!done) {
      std::tie(rr, sum) = true_residual();
      residual_is_true = true;
      if (!converged(rr, sum)) {
        std::ostringstream os;
        os << "conjugate gradients broke down, relative residual " << std::sqrt(rr) / b_norm2;
        throw SolverStall(os.str(), std::sqrt(rr) / b_norm2, it);
      }
    }
  }
  return {it, std::sqrt(rr) / b_norm2};
}

Field solve_helmholtz(const Grid& g, double coeff, double alpha, const Field& rhs, double tol,
                      int max_iters) {
  require_on_grid(rhs, g, "solve_helmholtz");
  if (!(coeff >= 0.0)) throw PreconditionError("solve_helmholtz: coefficient must be >= 0");
  const std::vector<double> fc(g.faces().size(), coeff);
  const std::vector<double> sh(g.size(), alpha);
  Field x(g, 0.0);
  solve_helmholtz(g, fc, sh, rhs.values(), x.values(), tol, max_iters);
  return x;
}

Field solve_helmholtz(const Grid& g, const Field& coeff, double alpha, const Field& rhs, double tol,
                      int max_iters) {
  require_on_grid(rhs, g, "solve_helmholtz");
  require_on_grid(coeff, g, "solve_helmholtz");
  const FaceTable& t = g.faces();
  std::vector<double> fc(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    fc[k] = 0.5 * (coeff[t.left[k]] + coeff[t.right[k]]);
  }
  const std::vector<double> sh(g.size(), alpha);
  Field x(g, 0.0);
  solve_helmholtz(g, fc, sh, rhs.values(), x.values(), tol, max_iters);
  return x;
}

}  // namespace kslab
