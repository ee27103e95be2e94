// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "prescient/mathcore.hpp"

namespace prescient::optim {

using mathcore::ComplexMatrix;

struct SolverOptions {
  int max_iters = 500;
  double eps = 1e-6;             // stopping norm on the iterate difference
  double armijo_sigma = 1e-4;    // sufficient-increase constant
  double armijo_backtrack = 0.5;
  double armijo_step0 = 1.0;
  double barrier_mu0 = 1.0;
  double barrier_mu_factor = 0.2;
  double barrier_mu_min = 1e-9;
  double barrier_newton_tol = 1e-10;  // squared Newton decrement threshold
  int barrier_max_newton = 250;       // per stage
  double kkt_tol = 1e-6;
  double bisection_tol = 1e-4;
  int line_search_grid = 21;
  double line_search_tol = 1e-4;
  double infeasibility_tol = 1e-7;    // normalized violation verdict threshold
};

struct SolveTrace {
  std::vector<double> objective;      // per accepted iterate / barrier stage
  std::vector<double> violation;
  std::string termination;
  int iterations = 0;
};

// ---------------------------------------------------------------------------
// Projected gradient ascent: gradient step with a backtracked step size,
// projection onto the feasible set, then a relaxation step toward the
// projected point; stops when the iterate movement drops below opts.eps.
struct AscentOracle {
  std::function<double(const ComplexMatrix&)> value;
  std::function<ComplexMatrix(const ComplexMatrix&)> gradient;  // ascent direction
  std::function<ComplexMatrix(const ComplexMatrix&)> project;
};

std::pair<ComplexMatrix, SolveTrace> projected_ascent(const AscentOracle& oracle,
                                                      const ComplexMatrix& init,
                                                      const SolverOptions& opts);

// ---------------------------------------------------------------------------
// Bisection over a monotone feasibility oracle. Requires feasible(t_lo);
// returns the feasible end of the final bracket. With relative=true the
// stopping rule is (hi - lo) < tol * (1 + hi).
double bisect_feasibility(const std::function<bool(double)>& feasible, double t_lo,
                          double t_hi, double tol, bool relative = false,
                          SolveTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Maximizes a scalar objective on [0,1]: coarse grid (endpoints included)
// followed by golden-section refinement around the best grid cell; returns
// the best point encountered.
double golden_line_search(const std::function<double(double)>& objective,
                          int coarse_grid = 21, double tol = 1e-4);

// ---------------------------------------------------------------------------
// Structured concave maximization over Hermitian PSD blocks with linear
// trace constraints, solved by a logarithmic-barrier Newton method:
//
//   maximize  sum_b w_b * ln det(I + G_b S_b G_b^H) + sum_b <C_b, S_b> + c0 * s
//   s.t.      sum_b <A_jb, S_b> + a_j * s  (<= | >=)  bound_j,   S_b >= 0,
//
// with s an optional free scalar. <.,.> is the real trace inner product.
struct BlockProgram {
  std::vector<int> dims;                  // block sizes
  std::vector<double> logdet_weight;      // w_b; 0 disables the term
  std::vector<ComplexMatrix> logdet_factor;  // G_b (rows x dims[b]); empty if unused
  std::vector<ComplexMatrix> linear_coeff;   // Hermitian C_b; empty if zero
  bool has_free_scalar = false;
  double free_coeff = 0.0;                // c0

  struct Constraint {
    std::vector<ComplexMatrix> A;  // one Hermitian coefficient per block (empty = 0)
    double free_coeff = 0.0;       // a_j
    double bound = 0.0;
    bool upper = true;             // true: value <= bound, false: value >= bound
    double scale = 1.0;            // normalization of the barrier slack
  };
  std::vector<Constraint> constraints;

  // Optional early exit, checked after every accepted Newton step and again
  // at each stage boundary; receives the current blocks, free scalar,
  // barrier parameter, and whether the stage has converged (only then do
  // central-path gap bounds apply to the current point).
  std::function<bool(const std::vector<ComplexMatrix>&, double, double, bool)> early_stop;
};

struct BlockSolution {
  std::vector<ComplexMatrix> blocks;
  double free_scalar = 0.0;
  double objective = 0.0;        // barrier terms excluded
  double kkt_residual = 0.0;
  bool feasible_start_found = true;
  bool early_stopped = false;
  SolveTrace trace;
};

// init_blocks may be empty: a strictly feasible start is then sought by
// scaling identity blocks (and, if provided, scaled copies of hint_blocks).
BlockSolution barrier_concave_max(const BlockProgram& program,
                                  const std::vector<ComplexMatrix>& init_blocks,
                                  double init_scalar, const SolverOptions& opts);

}  // namespace prescient::optim
