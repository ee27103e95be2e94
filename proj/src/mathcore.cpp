// SPDX-License-Identifier: Apache-2.0
#include "prescient/mathcore.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace prescient::mathcore {

const Tolerances& tolerances() {
  static const Tolerances tols{};
  return tols;
}

double gaussian_q(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("gaussian_q: non-finite argument");
  return 0.5 * std::erfc(x * 0.7071067811865475244);
}

double erlang_survival(int m, double x) {
  if (m < 1) throw std::invalid_argument("erlang_survival: m must be >= 1");
  if (x < 0) throw std::invalid_argument("erlang_survival: x must be >= 0");
  if (x == 0.0) return 1.0;
  if (x < 700.0) {
    // Direct Poisson pmf accumulation; every term is a pmf value <= 1.
    double term = std::exp(-x);
    double sum = term;
    for (int r = 1; r < m; ++r) {
      term *= x / r;
      sum += term;
    }
    return sum < 1.0 ? sum : 1.0;
  }
  // Log-space (log-sum-exp) path when e^{-x} underflows.
  double lx = std::log(x);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < m; ++r) {
    double lr = -x + r * lx - std::lgamma(r + 1.0);
    if (lr > max_log) max_log = lr;
  }
  if (!std::isfinite(max_log)) return 0.0;
  double acc = 0.0;
  for (int r = 0; r < m; ++r) {
    acc += std::exp(-x + r * lx - std::lgamma(r + 1.0) - max_log);
  }
  double v = std::exp(max_log) * acc;
  return v < 1.0 ? v : 1.0;
}

double erlang_survival_deriv(int m, double x) {
  if (m < 1) throw std::invalid_argument("erlang_survival_deriv: m must be >= 1");
  if (x < 0) throw std::invalid_argument("erlang_survival_deriv: x must be >= 0");
  if (x == 0.0) return m == 1 ? -1.0 : 0.0;
  double lv = -x + (m - 1) * std::log(x) - std::lgamma(static_cast<double>(m));
  return -std::exp(lv);
}

double erlang_survival_inverse(int m, double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("erlang_survival_inverse: p must lie in (0,1)");
  // Survival decreases from 1 at x=0 toward 0; bracket the root by doubling.
  double lo = 0.0;
  double hi = m + 10.0 * std::sqrt(static_cast<double>(m)) + 10.0;
  while (erlang_survival(m, hi) > p) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("erlang_survival_inverse: bracket expansion failed");
  }
  const double rel = tolerances().survival_inverse_rel;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double f = erlang_survival(m, x) - p;
    if (f > 0)
      lo = x;  // survival still above p, root lies right
    else
      hi = x;
    double df = erlang_survival_deriv(m, x);
    double step = (df != 0.0) ? f / df : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // fall back to bisection
    double move = std::abs(xn - x);
    x = xn;
    if (move <= rel * std::max(1.0, x) * 0.01 && (hi - lo) <= rel * std::max(1.0, x)) break;
  }
  return x;
}

double chisq_survival(int dof, double x) {
  if (dof <= 0 || dof % 2 != 0)
    throw std::invalid_argument("chisq_survival: dof must be a positive even count");
  if (x < 0) throw std::invalid_argument("chisq_survival: x must be >= 0");
  return erlang_survival(dof / 2, 0.5 * x);
}

double chisq_survival_inverse(int dof, double p) {
  if (dof <= 0 || dof % 2 != 0)
    throw std::invalid_argument("chisq_survival_inverse: dof must be a positive even count");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("chisq_survival_inverse: p must lie in (0,1)");
  return 2.0 * erlang_survival_inverse(dof / 2, p);
}

namespace {

double log_poisson_pmf(int k, double mean) {
  // mean > 0 assumed
  return -mean + k * std::log(mean) - std::lgamma(k + 1.0);
}

}  // namespace

double marcum_q(int order, double a, double b) {
  if (order < 1) throw std::invalid_argument("marcum_q: order must be >= 1");
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("marcum_q: a, b must be finite and nonnegative");
  if (b == 0.0) return 1.0;
  const double delta = 0.5 * a * a;  // Poisson mixing mean
  const double y = 0.5 * b * b;      // central survival argument
  if (delta == 0.0) return erlang_survival(order, y);

  const double tail = tolerances().marcum_tail;
  // Start at the Poisson mode so weights are representable for any delta,
  // then sweep outward; central survivals follow the one-term recurrence
  // S_{j+1} = S_j + pmf(order + j), S_{j-1} = S_j - pmf(order + j - 1).
  const long j0 = static_cast<long>(std::floor(delta));
  double s_mode = erlang_survival(order + static_cast<int>(j0), y);

  double acc = 0.0;
  double mass = 0.0;

  double w = std::exp(log_poisson_pmf(static_cast<int>(j0), delta));
  double s = s_mode;
  // Upward sweep, j = j0, j0+1, ...
  {
    double wu = w, su = s;
    long j = j0;
    while (true) {
      acc += wu * su;
      mass += wu;
      if (1.0 - mass < tail) break;
      su += std::exp(log_poisson_pmf(static_cast<int>(order + j), y));
      if (su > 1.0) su = 1.0;
      ++j;
      wu *= delta / static_cast<double>(j);
      if (wu == 0.0 && j > j0 + 8) break;
      if (j > j0 + 100000000L) break;
    }
  }
  // Downward sweep, j = j0-1, ..., 0
  if (1.0 - mass >= tail && j0 > 0) {
    double wd = w, sd = s;
    for (long j = j0 - 1; j >= 0; --j) {
      wd *= static_cast<double>(j + 1) / delta;
      sd -= std::exp(log_poisson_pmf(static_cast<int>(order + j), y));
      if (sd < 0.0) sd = 0.0;
      acc += wd * sd;
      mass += wd;
      if (1.0 - mass < tail) break;
      if (wd == 0.0) break;
    }
  }
  if (acc > 1.0) acc = 1.0;
  if (acc < 0.0) acc = 0.0;
  return acc;
}

SpectralDecomposition hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_eig: matrix must be square");
  const double scale = std::max(1.0, m.norm());
  const double asym = (m - m.adjoint()).norm();
  if (asym > tolerances().hermitian_rel * scale)
    throw std::invalid_argument("hermitian_eig: input is not Hermitian (residual " +
                                std::to_string(asym / scale) + ")");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(0.5 * (m + m.adjoint()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  const Eigen::Index n = m.rows();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

ComplexMatrix nullspace_basis(const ComplexMatrix& m, double tol) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
  const Eigen::Index cols = m.cols();
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol * smax) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace prescient::mathcore
