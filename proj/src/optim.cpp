// SPDX-License-Identifier: Apache-2.0
#include "prescient/optim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace prescient::optim {

namespace {

double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint() * b).trace().real();
}

}  // namespace

std::pair<ComplexMatrix, SolveTrace> projected_ascent(const AscentOracle& oracle,
                                                      const ComplexMatrix& init,
                                                      const SolverOptions& opts) {
  SolveTrace trace;
  ComplexMatrix w = init;
  double f = oracle.value(w);
  if (!std::isfinite(f)) throw std::invalid_argument("projected_ascent: objective not finite at init");
  trace.objective.push_back(f);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    trace.iterations = iter + 1;
    ComplexMatrix g = oracle.gradient(w);
    if (!g.allFinite()) {
      std::ostringstream dump;
      dump << "projected_ascent: non-finite gradient at iteration " << iter
           << "; iterate:\n"
           << w;
      throw std::runtime_error(dump.str());
    }
    const double gnorm = g.norm();
    if (gnorm < 1e-15 * std::max(1.0, w.norm())) {
      trace.termination = "zero_gradient";
      return {w, trace};
    }

    // Gradient step with backtracked length, projected onto the feasible set.
    double s = opts.armijo_step0 / std::max(1.0, gnorm);
    ComplexMatrix w_bar;
    double dir_deriv = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      w_bar = oracle.project(w + s * g);
      ComplexMatrix d = w_bar - w;
      // Real directional derivative along d for a real-valued objective of a
      // complex matrix with conjugate-gradient convention.
      dir_deriv = 2.0 * real_inner(g, d);
      double f_bar = oracle.value(w_bar);
      if (dir_deriv > 0 && f_bar >= f + opts.armijo_sigma * dir_deriv) {
        accepted = true;
        break;
      }
      s *= opts.armijo_backtrack;
    }
    if (!accepted) {
      trace.termination = "no_ascent_step";
      return {w, trace};
    }

    // Relaxation step along the feasible segment toward the projected point.
    ComplexMatrix d = w_bar - w;
    double alpha = 1.0;
    double f_next = oracle.value(w + alpha * d);
    for (int bt = 0; bt < 60 && f_next < f + opts.armijo_sigma * alpha * dir_deriv; ++bt) {
      alpha *= opts.armijo_backtrack;
      f_next = oracle.value(w + alpha * d);
    }
    ComplexMatrix w_next = w + alpha * d;
    const double move = (w_next - w).norm();
    w = w_next;
    f = f_next;
    trace.objective.push_back(f);
    if (move < opts.eps) {
      trace.termination = "step_norm";
      return {w, trace};
    }
  }
  trace.termination = "max_iters";
  return {w, trace};
}

double bisect_feasibility(const std::function<bool(double)>& feasible, double t_lo,
                          double t_hi, double tol, bool relative, SolveTrace* trace) {
  if (!(t_hi >= t_lo)) throw std::invalid_argument("bisect_feasibility: empty bracket");
  if (!feasible(t_lo)) throw std::invalid_argument("bisect_feasibility: lower end infeasible");
  if (feasible(t_hi)) {
    if (trace) trace->termination = "upper_end_feasible";
    return t_hi;
  }
  int iters = 0;
  auto width_ok = [&] {
    return relative ? (t_hi - t_lo) < tol * (1.0 + t_hi) : (t_hi - t_lo) <= tol;
  };
  while (!width_ok()) {
    double mid = 0.5 * (t_lo + t_hi);
    if (mid <= t_lo || mid >= t_hi) break;  // bracket at floating-point resolution
    if (feasible(mid))
      t_lo = mid;
    else
      t_hi = mid;
    ++iters;
    if (trace) {
      trace->objective.push_back(t_lo);
      trace->violation.push_back(t_hi);
    }
  }
  if (trace) {
    trace->iterations = iters;
    if (trace->termination.empty()) trace->termination = "bracket_width";
  }
  return t_lo;
}

double golden_line_search(const std::function<double(double)>& objective,
                          int coarse_grid, double tol) {
  if (coarse_grid < 2) coarse_grid = 2;
  double best_x = 0.0;
  double best_f = objective(0.0);
  int best_idx = 0;
  std::vector<double> xs(coarse_grid), fs(coarse_grid);
  for (int i = 0; i < coarse_grid; ++i) {
    xs[i] = static_cast<double>(i) / (coarse_grid - 1);
    fs[i] = objective(xs[i]);
    if (fs[i] > best_f) {
      best_f = fs[i];
      best_x = xs[i];
      best_idx = i;
    }
  }
  double lo = xs[std::max(0, best_idx - 1)];
  double hi = xs[std::min(coarse_grid - 1, best_idx + 1)];

  const double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = objective(x2);
    }
    if (f1 > best_f) { best_f = f1; best_x = x1; }
    if (f2 > best_f) { best_f = f2; best_x = x2; }
  }
  double mid = 0.5 * (a + b);
  if (objective(mid) > best_f) best_x = mid;
  return best_x;
}

}  // namespace prescient::optim
