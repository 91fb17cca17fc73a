#pragma once

#include "kslab/grid.hpp"

#include <span>
#include <vector>

namespace kslab {

struct SolveStats {
  int iterations{0};
  double relative_residual{0.0};
};

/**
 * Solves  w - div(c grad w) + alpha w = rhs  with zero-flux boundaries.
 *
 * The system is assembled in volume-weighted (symmetric) form
 *   (V (1 + alpha) + L_c) w = V rhs,
 * where L_c is the face-conductance Laplacian with conductances c_f * area_f / h_f, and
 * solved by Jacobi-preconditioned conjugate gradients. Convergence requires
 * ||r||_2 <= tol ||b||_2 and |sum r| <= tol ||b||_1; the second condition bounds the
 * conservation defect of the solve.
 *
 * `x` holds the initial guess on entry. Throws SolverStall after `max_iters` iterations.
 */
SolveStats solve_helmholtz(const Grid& g, std::span<const double> face_coeff,
                           std::span<const double> alpha, std::span<const double> rhs,
                           std::span<double> x, double tol, int max_iters);

/// Scalar coefficient and shift.
Field solve_helmholtz(const Grid& g, double coeff, double alpha, const Field& rhs, double tol,
                      int max_iters = 20000);

/// Cell coefficient field, averaged arithmetically onto faces.
Field solve_helmholtz(const Grid& g, const Field& coeff, double alpha, const Field& rhs, double tol,
                      int max_iters = 20000);

/// y = (V (1 + alpha) + L_c) x, the weighted operator used by the solver.
void apply_helmholtz(const Grid& g, std::span<const double> face_coeff, std::span<const double> alpha,
                     std::span<const double> x, std::span<double> y);

}  // namespace kslab
