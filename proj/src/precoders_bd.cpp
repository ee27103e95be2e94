// SPDX-License-Identifier: Apache-2.0
//
// Block-diagonalization schemes for multi-antenna underlay receivers. The
// per-user covariances live in the null space of the other users' stacked
// channels, which removes the zero-interference equality constraints and
// leaves a small concave program over PSD blocks.
#include <cmath>
#include <stdexcept>

#include "prescient/precoders.hpp"

namespace prescient::precoders {

namespace {

constexpr double kLog2 = 0.6931471805599453094;

std::vector<ComplexMatrix> nullspace_precoders(const CsiView& view, const NetworkConfig& cfg) {
  std::vector<ComplexMatrix> basis(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    ComplexMatrix stacked((cfg.K_u - 1) * cfg.r_u, cfg.t_u);
    int row = 0;
    for (int j = 0; j < cfg.K_u; ++j) {
      if (j == k) continue;
      stacked.middleRows(row, cfg.r_u) = view.H(j);
      row += cfg.r_u;
    }
    if (cfg.K_u == 1) {
      basis[k] = ComplexMatrix::Identity(cfg.t_u, cfg.t_u);
      continue;
    }
    basis[k] = mathcore::nullspace_basis(stacked, 1e-10);
    if (basis[k].cols() == 0)
      throw std::runtime_error("block diagonalization infeasible: empty null space for user " +
                               std::to_string(k));
  }
  return basis;
}

// Constraint rows shared by both BD programs, expressed on arbitrary
// per-user coefficient maps: coeff(k) must return the Hermitian matrix A_k
// with sum_k <A_k, S_k> the constrained value.
void append_bd_constraints(optim::BlockProgram& prog, const CsiView& view,
                           const NetworkConfig& cfg, const std::vector<double>& eta,
                           const std::vector<ComplexMatrix>& basis) {
  const int ku = cfg.K_u;
  {
    optim::BlockProgram::Constraint power;
    power.A.resize(ku);
    for (int k = 0; k < ku; ++k)
      power.A[k] = ComplexMatrix::Identity(basis[k].cols(), basis[k].cols());
    power.bound = cfg.P;
    power.upper = true;
    power.scale = cfg.P;
    prog.constraints.push_back(std::move(power));
  }
  if (cfg.r_p > 0) {
    optim::BlockProgram::Constraint pr;
    pr.A.resize(ku);
    for (int k = 0; k < ku; ++k) {
      ComplexMatrix nb = view.N() * basis[k];
      pr.A[k] = nb.adjoint() * nb;
    }
    pr.bound = cfg.xi_p;
    pr.upper = true;
    pr.scale = cfg.xi_p;
    prog.constraints.push_back(std::move(pr));
  }
  for (int i = 0; i < cfg.K; ++i) {
    if (i >= static_cast<int>(eta.size()) || eta[i] <= 0.0) continue;
    optim::BlockProgram::Constraint leak;
    leak.A.resize(ku);
    for (int k = 0; k < ku; ++k) {
      ComplexMatrix fb = view.F(i) * basis[k];
      leak.A[k] = fb.adjoint() * fb;
    }
    leak.bound = eta[i];
    leak.upper = false;
    leak.scale = std::max(eta[i], 1.0);
    prog.constraints.push_back(std::move(leak));
  }
}

// Full phase-1: minimize the worst normalized constraint violation over the
// relaxed program; returns strictly feasible blocks when they exist.
std::vector<ComplexMatrix> find_strictly_feasible(const optim::BlockProgram& prog,
                                                  const optim::SolverOptions& opts) {
  optim::BlockProgram relaxed = prog;
  for (size_t b = 0; b < relaxed.dims.size(); ++b) {
    if (b < relaxed.logdet_weight.size()) relaxed.logdet_weight[b] = 0.0;
    if (b < relaxed.linear_coeff.size()) relaxed.linear_coeff[b] = ComplexMatrix();
  }
  relaxed.has_free_scalar = true;
  relaxed.free_coeff = -1.0;
  for (auto& row : relaxed.constraints) row.free_coeff = row.upper ? -row.scale : row.scale;
  relaxed.early_stop = [](const std::vector<ComplexMatrix>&, double s, double mu,
                          bool stage_converged) {
    (void)mu;
    (void)stage_converged;
    return s < -1e-5;
  };
  std::vector<ComplexMatrix> init;
  for (int d : relaxed.dims) init.push_back(ComplexMatrix::Identity(d, d));
  double worst = 0.0;
  {
    // Violation of the identity start in each row's own scale.
    for (const auto& row : relaxed.constraints) {
      double val = 0.0;
      for (size_t b = 0; b < init.size(); ++b)
        if (b < row.A.size() && row.A[b].size() > 0)
          val += (row.A[b].adjoint() * init[b]).trace().real();
      double slack = (row.upper ? row.bound - val : val - row.bound) / row.scale;
      worst = std::min(worst, slack);
    }
  }
  optim::SolverOptions local = opts;
  local.barrier_mu_min = 1e-8;
  auto sol = optim::barrier_concave_max(relaxed, init, -worst + 1.0, local);
  if (!sol.feasible_start_found || sol.free_scalar > -1e-6) return {};
  return sol.blocks;
}

// Strictly positive start direction tilted toward the leakage floors, which
// the phase-1 scaling can satisfy far more often than plain identity blocks.
ComplexMatrix leakage_direction(const CsiView& view, const NetworkConfig& cfg,
                                const std::vector<double>& eta) {
  ComplexMatrix m = ComplexMatrix::Zero(cfg.t_u, cfg.t_u);
  for (int i = 0; i < cfg.K && i < static_cast<int>(eta.size()); ++i)
    if (eta[i] > 0.0) m += view.F(i).adjoint() * view.F(i);
  const double norm = m.norm();
  if (norm > 0) m /= norm;
  return m;
}

Precoder assemble(const std::vector<ComplexMatrix>& blocks_w, const NetworkConfig& cfg,
                  const std::string& scheme, double objective) {
  Precoder p;
  p.scheme = scheme;
  p.objective = objective;
  int total = 0;
  for (const auto& wk : blocks_w) total += static_cast<int>(wk.cols());
  p.W = ComplexMatrix::Zero(cfg.t_u, total);
  p.cols_per_user.clear();
  int off = 0;
  for (const auto& wk : blocks_w) {
    p.W.middleCols(off, wk.cols()) = wk;
    p.cols_per_user.push_back(static_cast<int>(wk.cols()));
    off += static_cast<int>(wk.cols());
  }
  return p;
}

}  // namespace

Precoder pbd_joint(const CsiView& view, const NetworkConfig& cfg,
                   const std::vector<double>& eta, const optim::SolverOptions& opts) {
  auto basis = nullspace_precoders(view, cfg);

  optim::BlockProgram prog;
  for (int k = 0; k < cfg.K_u; ++k) {
    prog.dims.push_back(static_cast<int>(basis[k].cols()));
    prog.logdet_weight.push_back(1.0 / kLog2);  // rates in bits
    prog.logdet_factor.push_back(view.H(k) * basis[k]);
  }
  append_bd_constraints(prog, view, cfg, eta, basis);

  optim::SolverOptions local = opts;
  local.barrier_mu_min = std::min(opts.barrier_mu_min, 1e-10);
  std::vector<ComplexMatrix> hint;
  ComplexMatrix dir = leakage_direction(view, cfg, eta);
  if (dir.norm() > 0) {
    for (int k = 0; k < cfg.K_u; ++k) {
      const int nb = static_cast<int>(basis[k].cols());
      hint.push_back(basis[k].adjoint() * dir * basis[k] +
                     0.2 * ComplexMatrix::Identity(nb, nb));
    }
  }
  optim::BlockSolution sol = optim::barrier_concave_max(prog, hint, 0.0, local);
  if (!sol.feasible_start_found) {
    auto start = find_strictly_feasible(prog, local);
    if (start.empty())
      throw std::runtime_error("pbd_joint: leakage floors infeasible under the power and PR caps");
    sol = optim::barrier_concave_max(prog, start, 0.0, local);
    if (!sol.feasible_start_found)
      throw std::runtime_error("pbd_joint: no strictly feasible covariance start");
  }

  std::vector<ComplexMatrix> w(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    auto eig = mathcore::hermitian_eig(sol.blocks[k]);
    ComplexMatrix root = eig.eigenvectors *
                         eig.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                         eig.eigenvectors.adjoint();
    w[k] = basis[k] * root;
  }
  Precoder p = assemble(w, cfg, "pbd_joint", sol.objective);
  p.iterations = static_cast<int>(sol.trace.objective.size());
  check_feasible(p.W, cfg, view.N(), "pbd_joint");
  return p;
}

Precoder pbd_separate(const CsiView& view, const NetworkConfig& cfg,
                      const std::vector<double>& eta, const optim::SolverOptions& opts) {
  auto basis = nullspace_precoders(view, cfg);

  // Unit-power per-mode precoders from the effective-channel SVD.
  std::vector<ComplexMatrix> unit(cfg.K_u);  // t_u x r_k, orthonormal columns
  std::vector<Eigen::VectorXd> gains(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    ComplexMatrix eff = view.H(k) * basis[k];
    Eigen::JacobiSVD<ComplexMatrix> svd(eff, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-12 * sv(0)) ++rank;
    if (rank == 0)
      throw std::runtime_error("pbd_separate: effective channel vanished for user " +
                               std::to_string(k));
    unit[k] = basis[k] * svd.matrixV().leftCols(rank);
    gains[k] = sv.head(rank);
  }

  // Concave per-mode power allocation under the shared constraint set.
  optim::BlockProgram prog;
  std::vector<std::pair<int, int>> mode_of;  // (user, mode) per scalar block
  for (int k = 0; k < cfg.K_u; ++k)
    for (int m = 0; m < gains[k].size(); ++m) {
      prog.dims.push_back(1);
      prog.logdet_weight.push_back(1.0 / kLog2);
      ComplexMatrix g(1, 1);
      g(0, 0) = gains[k](m);
      prog.logdet_factor.push_back(g);
      mode_of.emplace_back(k, m);
    }
  const int nvar = static_cast<int>(prog.dims.size());
  auto scalar_constraint = [&](auto per_mode_coeff, double bound, bool upper, double scale) {
    optim::BlockProgram::Constraint row;
    row.A.resize(nvar);
    for (int v = 0; v < nvar; ++v) {
      ComplexMatrix a(1, 1);
      a(0, 0) = per_mode_coeff(mode_of[v].first, mode_of[v].second);
      row.A[v] = a;
    }
    row.bound = bound;
    row.upper = upper;
    row.scale = scale;
    prog.constraints.push_back(std::move(row));
  };
  scalar_constraint([&](int, int) { return 1.0; }, cfg.P, true, cfg.P);  // unit columns
  if (cfg.r_p > 0)
    scalar_constraint(
        [&](int k, int m) { return (view.N() * unit[k].col(m)).squaredNorm(); },
        cfg.xi_p, true, cfg.xi_p);
  for (int i = 0; i < cfg.K; ++i) {
    if (i >= static_cast<int>(eta.size()) || eta[i] <= 0.0) continue;
    scalar_constraint(
        [&](int k, int m) { return (view.F(i) * unit[k].col(m)).squaredNorm(); },
        eta[i], false, std::max(eta[i], 1.0));
  }

  optim::SolverOptions local = opts;
  local.barrier_mu_min = std::min(opts.barrier_mu_min, 1e-11);
  std::vector<ComplexMatrix> hint;
  bool any_floor = false;
  for (double e : eta)
    if (e > 0) any_floor = true;
  if (any_floor) {
    double total = 0.0;
    std::vector<double> weight(nvar, 0.0);
    for (int v = 0; v < nvar; ++v) {
      auto [k, m] = mode_of[v];
      for (int i = 0; i < cfg.K && i < static_cast<int>(eta.size()); ++i)
        if (eta[i] > 0) weight[v] += (view.F(i) * unit[k].col(m)).squaredNorm();
      total += weight[v];
    }
    for (int v = 0; v < nvar; ++v) {
      double w = total > 0 ? weight[v] / total : 0.0;
      hint.push_back(ComplexMatrix::Constant(1, 1, w + 0.2));
    }
  }
  optim::BlockSolution sol = optim::barrier_concave_max(prog, hint, 0.0, local);
  if (!sol.feasible_start_found) {
    auto start = find_strictly_feasible(prog, local);
    if (start.empty())
      throw std::runtime_error(
          "pbd_separate: leakage floors infeasible under the power and PR caps");
    sol = optim::barrier_concave_max(prog, start, 0.0, local);
    if (!sol.feasible_start_found)
      throw std::runtime_error("pbd_separate: no strictly feasible power start");
  }

  std::vector<ComplexMatrix> w(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k)
    w[k] = ComplexMatrix::Zero(cfg.t_u, gains[k].size());
  for (int v = 0; v < nvar; ++v) {
    auto [k, m] = mode_of[v];
    const double lambda = std::max(sol.blocks[v](0, 0).real(), 0.0);
    w[k].col(m) = std::sqrt(lambda) * unit[k].col(m);
  }
  Precoder p = assemble(w, cfg, "pbd_separate", sol.objective);
  p.iterations = static_cast<int>(sol.trace.objective.size());
  check_feasible(p.W, cfg, view.N(), "pbd_separate");
  return p;
}

Precoder conventional_bd(const CsiView& view, const NetworkConfig& cfg,
                         const optim::SolverOptions& opts) {
  Precoder p = pbd_separate(view, cfg, std::vector<double>(cfg.K, 0.0), opts);
  p.scheme = "conventional_bd";
  return p;
}

}  // namespace prescient::precoders
