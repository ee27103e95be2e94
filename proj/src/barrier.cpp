// SPDX-License-Identifier: Apache-2.0
//
// Logarithmic-barrier Newton solver for small structured concave programs
// over Hermitian PSD blocks. Problem sizes in this library are tiny (blocks
// of dimension <= 8), so dense Newton systems in a real parameterization of
// the Hermitian blocks are the simplest reliable choice.
#include <cmath>
#include <stdexcept>

#include "prescient/optim.hpp"

namespace prescient::optim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double real_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint() * b).trace().real();
}

// Orthonormal Hermitian basis: n diagonal units, then (re, im) pairs for
// each off-diagonal position, all unit norm under Re tr(A^H B).
std::vector<ComplexMatrix> hermitian_basis(int n) {
  std::vector<ComplexMatrix> basis;
  basis.reserve(n * n);
  const double inv_sqrt2 = 0.7071067811865475244;
  for (int i = 0; i < n; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(n, n);
      re(i, j) = inv_sqrt2;
      re(j, i) = inv_sqrt2;
      basis.push_back(re);
      ComplexMatrix im = ComplexMatrix::Zero(n, n);
      im(i, j) = std::complex<double>(0, inv_sqrt2);
      im(j, i) = std::complex<double>(0, -inv_sqrt2);
      basis.push_back(im);
    }
  return basis;
}

struct Workspace {
  const BlockProgram* prog;
  std::vector<std::vector<ComplexMatrix>> basis;  // per block
  std::vector<int> offset;                        // coordinate offset per block
  int dim = 0;                                    // total coordinates (incl. scalar)
  int scalar_index = -1;

  explicit Workspace(const BlockProgram& p) : prog(&p) {
    offset.resize(p.dims.size());
    for (size_t b = 0; b < p.dims.size(); ++b) {
      offset[b] = dim;
      basis.push_back(hermitian_basis(p.dims[b]));
      dim += p.dims[b] * p.dims[b];
    }
    if (p.has_free_scalar) {
      scalar_index = dim;
      dim += 1;
    }
  }

  std::vector<ComplexMatrix> unpack(const VectorXd& x) const {
    std::vector<ComplexMatrix> blocks(prog->dims.size());
    for (size_t b = 0; b < prog->dims.size(); ++b) {
      const int n = prog->dims[b];
      ComplexMatrix s = ComplexMatrix::Zero(n, n);
      for (int a = 0; a < n * n; ++a) s += x(offset[b] + a) * basis[b][a];
      blocks[b] = s;
    }
    return blocks;
  }

  VectorXd pack(const std::vector<ComplexMatrix>& blocks, double scalar) const {
    VectorXd x = VectorXd::Zero(dim);
    for (size_t b = 0; b < blocks.size(); ++b) {
      for (int a = 0; a < prog->dims[b] * prog->dims[b]; ++a)
        x(offset[b] + a) = real_inner(basis[b][a], blocks[b]);
    }
    if (scalar_index >= 0) x(scalar_index) = scalar;
    return x;
  }

  double scalar_of(const VectorXd& x) const {
    return scalar_index >= 0 ? x(scalar_index) : 0.0;
  }
};

// Linear constraint value and its (constant) coordinate gradient.
struct ConstraintData {
  VectorXd grad_value;  // d(value)/dx
  double bound;
  bool upper;
  double scale;

  double slack(double value) const {
    return (upper ? (bound - value) : (value - bound)) / scale;
  }
};

double objective_value(const BlockProgram& p, const std::vector<ComplexMatrix>& blocks,
                       double scalar) {
  double f = p.has_free_scalar ? p.free_coeff * scalar : 0.0;
  for (size_t b = 0; b < p.dims.size(); ++b) {
    if (b < p.linear_coeff.size() && p.linear_coeff[b].size() > 0)
      f += real_inner(p.linear_coeff[b], blocks[b]);
    if (b < p.logdet_factor.size() && p.logdet_factor[b].size() > 0 &&
        p.logdet_weight[b] != 0.0) {
      const ComplexMatrix& g = p.logdet_factor[b];
      ComplexMatrix x = ComplexMatrix::Identity(g.rows(), g.rows()) +
                        g * blocks[b] * g.adjoint();
      Eigen::PartialPivLU<ComplexMatrix> lu(x);
      double ld = 0.0;
      for (int i = 0; i < x.rows(); ++i) ld += std::log(std::abs(lu.matrixLU()(i, i)));
      f += p.logdet_weight[b] * ld;
    }
  }
  return f;
}

double min_eigenvalue(const ComplexMatrix& s) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

BlockSolution barrier_concave_max(const BlockProgram& program,
                                  const std::vector<ComplexMatrix>& init_blocks,
                                  double init_scalar, const SolverOptions& opts) {
  Workspace ws(program);
  BlockSolution sol;

  // --- constraint precomputation -------------------------------------------
  std::vector<ConstraintData> cons;
  cons.reserve(program.constraints.size());
  for (const auto& c : program.constraints) {
    ConstraintData cd;
    cd.bound = c.bound;
    cd.upper = c.upper;
    cd.scale = c.scale > 0 ? c.scale : 1.0;
    cd.grad_value = VectorXd::Zero(ws.dim);
    for (size_t b = 0; b < program.dims.size(); ++b) {
      if (b < c.A.size() && c.A[b].size() > 0) {
        for (int a = 0; a < program.dims[b] * program.dims[b]; ++a)
          cd.grad_value(ws.offset[b] + a) = real_inner(c.A[b], ws.basis[b][a]);
      }
    }
    if (ws.scalar_index >= 0) cd.grad_value(ws.scalar_index) = c.free_coeff;
    cons.push_back(std::move(cd));
  }

  auto constraint_values = [&](const VectorXd& x) {
    VectorXd v(cons.size());
    for (size_t j = 0; j < cons.size(); ++j) v(j) = cons[j].grad_value.dot(x);
    return v;
  };

  auto strictly_feasible = [&](const VectorXd& x, double margin) {
    VectorXd v = constraint_values(x);
    for (size_t j = 0; j < cons.size(); ++j)
      if (cons[j].slack(v(j)) <= margin) return false;
    auto blocks = ws.unpack(x);
    for (const auto& s : blocks)
      if (min_eigenvalue(s) <= margin) return false;
    return true;
  };

  // --- starting point --------------------------------------------------------
  // Phase-1 power-scaling heuristic: scale a strictly positive base direction
  // by the interval every linear constraint admits. Candidate bases are the
  // caller's hint (if any) followed by identity blocks.
  auto try_scaled = [&](const VectorXd& xbase) -> std::pair<bool, VectorXd> {
    VectorXd u = constraint_values(xbase);
    double c_min = 0.0, c_max = std::numeric_limits<double>::infinity();
    bool possible = true;
    for (size_t j = 0; j < cons.size(); ++j) {
      const double uj = u(j), bj = cons[j].bound;
      if (cons[j].upper) {
        if (uj > 0)
          c_max = std::min(c_max, bj / uj);
        else if (bj < 0)
          possible = false;  // scaling a PSD direction cannot reach a negative cap
      } else {
        if (uj > 0)
          c_min = std::max(c_min, bj / uj);
        else if (bj > 0)
          possible = false;
      }
    }
    if (!possible || !(c_min < c_max)) return {false, xbase};
    double lo = c_min > 0 ? c_min * 1.02 : (c_max == std::numeric_limits<double>::infinity()
                                                ? 1e-3
                                                : c_max * 1e-3);
    double hi = c_max == std::numeric_limits<double>::infinity() ? std::max(1.0, 4.0 * lo)
                                                                 : c_max * 0.98;
    double c = std::sqrt(std::max(lo, 1e-300) * std::max(hi, 1e-300));
    if (!(c > 0) || !std::isfinite(c)) c = 1.0;
    VectorXd xc = c * xbase;
    return {strictly_feasible(xc, 0.0), xc};
  };

  VectorXd x;
  bool started = false;
  if (!init_blocks.empty()) {
    x = ws.pack(init_blocks, init_scalar);
    started = strictly_feasible(x, 0.0);
    if (!started && !program.has_free_scalar) {
      auto [ok, xc] = try_scaled(ws.pack(init_blocks, 0.0));
      if (ok) {
        x = xc;
        started = true;
      }
    }
  }
  if (!started) {
    std::vector<ComplexMatrix> eye(program.dims.size());
    for (size_t b = 0; b < program.dims.size(); ++b)
      eye[b] = ComplexMatrix::Identity(program.dims[b], program.dims[b]);
    auto [ok, xc] = try_scaled(ws.pack(eye, 0.0));
    if (ok) {
      x = xc;
      started = true;
    }
  }
  if (!started) {
    sol.feasible_start_found = false;
    sol.trace.termination = "phase1_failed";
    return sol;
  }

  // --- barrier stages ---------------------------------------------------------
  const double nu_total = static_cast<double>(cons.size());
  double nu_cone = 0.0;
  for (int d : program.dims) nu_cone += d;
  double mu = opts.barrier_mu0;
  double last_decrement = 0.0;

  auto phi_of = [&](const VectorXd& xx, double mu_now, bool& ok) {
    ok = true;
    VectorXd v = constraint_values(xx);
    double phi = 0.0;
    for (size_t j = 0; j < cons.size(); ++j) {
      double s = cons[j].slack(v(j));
      if (s <= 0) { ok = false; return 0.0; }
      phi -= mu_now * std::log(s);
    }
    auto blocks = ws.unpack(xx);
    for (const auto& s : blocks) {
      Eigen::LLT<ComplexMatrix> llt(s - 1e-12 * ComplexMatrix::Identity(s.rows(), s.cols()));
      if (llt.info() != Eigen::Success) { ok = false; return 0.0; }
      double ld = 0.0;
      for (int i = 0; i < s.rows(); ++i) ld += std::log(std::abs(llt.matrixL()(i, i).real()));
      phi -= mu_now * 2.0 * ld;
    }
    phi -= objective_value(program, blocks, ws.scalar_of(xx));
    return phi;
  };

  bool done = false;
  while (!done) {
    for (int newton = 0; newton < opts.barrier_max_newton; ++newton) {
      auto blocks = ws.unpack(x);
      VectorXd v = constraint_values(x);

      VectorXd grad = VectorXd::Zero(ws.dim);
      MatrixXd hess = MatrixXd::Zero(ws.dim, ws.dim);

      // objective part (negated)
      if (ws.scalar_index >= 0) grad(ws.scalar_index) -= program.free_coeff;
      for (size_t b = 0; b < program.dims.size(); ++b) {
        const int n = program.dims[b];
        const int nb = n * n;
        ComplexMatrix gradmat = ComplexMatrix::Zero(n, n);
        if (b < program.linear_coeff.size() && program.linear_coeff[b].size() > 0)
          gradmat += program.linear_coeff[b];
        ComplexMatrix y;  // curvature kernel of the logdet term
        bool has_logdet = b < program.logdet_factor.size() &&
                          program.logdet_factor[b].size() > 0 && program.logdet_weight[b] != 0.0;
        if (has_logdet) {
          const ComplexMatrix& g = program.logdet_factor[b];
          ComplexMatrix xmat = ComplexMatrix::Identity(g.rows(), g.rows()) +
                               g * blocks[b] * g.adjoint();
          ComplexMatrix xinv = xmat.llt().solve(ComplexMatrix::Identity(g.rows(), g.rows()));
          y = g.adjoint() * xinv * g;
          gradmat += program.logdet_weight[b] * y;
        }
        // cone barrier
        ComplexMatrix sinv =
            blocks[b].llt().solve(ComplexMatrix::Identity(n, n));
        for (int a = 0; a < nb; ++a)
          grad(ws.offset[b] + a) -=
              real_inner(gradmat, ws.basis[b][a]) + mu * real_inner(sinv, ws.basis[b][a]);
        // block curvature
        for (int a = 0; a < nb; ++a) {
          ComplexMatrix m_obj;
          if (has_logdet) m_obj = program.logdet_weight[b] * (y * ws.basis[b][a] * y);
          ComplexMatrix m_bar = mu * (sinv * ws.basis[b][a] * sinv);
          for (int a2 = a; a2 < nb; ++a2) {
            double hval = real_inner(m_bar, ws.basis[b][a2]);
            if (has_logdet) hval += real_inner(m_obj, ws.basis[b][a2]);
            hess(ws.offset[b] + a, ws.offset[b] + a2) += hval;
            if (a2 != a) hess(ws.offset[b] + a2, ws.offset[b] + a) += hval;
          }
        }
      }
      // constraint barriers
      for (size_t j = 0; j < cons.size(); ++j) {
        double s = cons[j].slack(v(j));
        double sgn = cons[j].upper ? -1.0 : 1.0;  // d(slack)/d(value)
        VectorXd gs = (sgn / cons[j].scale) * cons[j].grad_value;
        grad -= (mu / s) * gs;
        hess += (mu / (s * s)) * (gs * gs.transpose());
      }

      // Newton step with damping fallback.
      VectorXd step;
      double damping = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        MatrixXd h = hess;
        if (damping > 0) h += damping * MatrixXd::Identity(ws.dim, ws.dim);
        Eigen::LDLT<MatrixXd> ldlt(h);
        step = ldlt.solve(-grad);
        if (ldlt.info() == Eigen::Success && step.allFinite()) break;
        damping = damping == 0 ? 1e-10 * (1.0 + hess.diagonal().maxCoeff()) : damping * 100;
      }
      if (!step.allFinite())
        throw std::runtime_error("barrier_concave_max: Newton system unsolvable");

      double decrement = -grad.dot(step);
      last_decrement = std::max(decrement, 0.0);
      if (decrement <= 2.0 * opts.barrier_newton_tol) break;

      bool ok = false;
      double phi0 = phi_of(x, mu, ok);
      double t = 1.0;
      VectorXd x_new = x + step;
      for (int bt = 0; bt < 70; ++bt) {
        bool ok_new = false;
        double phi_new = phi_of(x_new, mu, ok_new);
        if (ok_new && phi_new <= phi0 - opts.armijo_sigma * t * decrement) break;
        t *= 0.5;
        x_new = x + t * step;
        if (bt == 69) x_new = x;  // no admissible step; stay put
      }
      if ((x_new - x).norm() == 0.0) break;
      x = x_new;

      if (program.early_stop) {
        auto bl = ws.unpack(x);
        if (program.early_stop(bl, ws.scalar_of(x), mu, false)) {
          sol.early_stopped = true;
          sol.blocks = bl;
          sol.free_scalar = ws.scalar_of(x);
          sol.objective = objective_value(program, bl, sol.free_scalar);
          sol.kkt_residual = mu * (nu_total + nu_cone);
          sol.trace.termination = "early_stop";
          return sol;
        }
      }
    }
    {
      auto bl = ws.unpack(x);
      sol.trace.objective.push_back(objective_value(program, bl, ws.scalar_of(x)));
      if (program.early_stop && program.early_stop(bl, ws.scalar_of(x), mu, true)) {
        sol.early_stopped = true;
        sol.blocks = bl;
        sol.free_scalar = ws.scalar_of(x);
        sol.objective = objective_value(program, bl, sol.free_scalar);
        sol.kkt_residual = mu * (nu_total + nu_cone);
        sol.trace.termination = "early_stop";
        return sol;
      }
    }
    if (mu <= opts.barrier_mu_min) {
      done = true;
    } else {
      mu = std::max(mu * opts.barrier_mu_factor, opts.barrier_mu_min);
    }
  }

  sol.blocks = ws.unpack(x);
  sol.free_scalar = ws.scalar_of(x);
  sol.objective = objective_value(program, sol.blocks, sol.free_scalar);
  // Suboptimality estimate: barrier duality gap plus the remaining Newton
  // descent (phi - phi* ~ decrement / 2 near the stage optimum).
  sol.kkt_residual = mu * (nu_total + nu_cone) + 0.5 * std::max(last_decrement, 0.0);
  sol.trace.termination = "mu_min";
  return sol;
}

}  // namespace prescient::optim
