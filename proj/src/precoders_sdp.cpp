// SPDX-License-Identifier: Apache-2.0
//
// Max-min partial-SINR beamforming via semidefinite relaxation: rank-1
// outer products are replaced by PSD user covariances, an outer bisection
// runs over the SINR target, and each probe is a barrier feasibility solve.
#include <cmath>
#include <stdexcept>

#include "prescient/precoders.hpp"

namespace prescient::precoders {

namespace {

struct FeasibilityProbe {
  const CsiView* view;
  const NetworkConfig* cfg;
  const std::vector<double>* eta;
  const optim::SolverOptions* opts;
  double margin = 1e-6;

  // Last strictly feasible covariances seen.
  std::vector<ComplexMatrix> best_blocks;
  bool have_blocks = false;

  bool operator()(double t) {
    const NetworkConfig& c = *cfg;
    optim::BlockProgram prog;
    prog.dims.assign(c.K_u, c.t_u);
    prog.logdet_weight.assign(c.K_u, 0.0);
    prog.logdet_factor.assign(c.K_u, ComplexMatrix());
    prog.has_free_scalar = true;
    prog.free_coeff = -1.0;  // minimize the worst normalized violation

    auto identity_blocks = [&](const ComplexMatrix& m, int only = -1) {
      std::vector<ComplexMatrix> a(c.K_u);
      for (int k = 0; k < c.K_u; ++k)
        if (only < 0 || only == k) a[k] = m;
      return a;
    };

    // Per-user SINR rows: t * sum_{j != k} <h_k^H h_k, J_j> - <h_k^H h_k, J_k>
    // <= -t * sigma_k^2.
    for (int k = 0; k < c.K_u; ++k) {
      ComplexMatrix hh = view->H(k).adjoint() * view->H(k);
      optim::BlockProgram::Constraint row;
      row.A.resize(c.K_u);
      for (int j = 0; j < c.K_u; ++j) row.A[j] = (j == k) ? (-hh).eval() : (t * hh).eval();
      row.bound = -t * c.sigma_k2[k];
      row.upper = true;
      row.scale = std::max(1.0, t * c.sigma_k2[k]);
      prog.constraints.push_back(std::move(row));
    }
    {
      optim::BlockProgram::Constraint power;
      power.A = identity_blocks(ComplexMatrix::Identity(c.t_u, c.t_u));
      power.bound = c.P;
      power.upper = true;
      power.scale = c.P;
      prog.constraints.push_back(std::move(power));
    }
    if (c.r_p > 0) {
      optim::BlockProgram::Constraint pr;
      pr.A = identity_blocks(view->N().adjoint() * view->N());
      pr.bound = c.xi_p;
      pr.upper = true;
      pr.scale = c.xi_p;
      prog.constraints.push_back(std::move(pr));
    }
    for (int i = 0; i < c.K; ++i) {
      if ((*eta)[i] <= 0.0) continue;  // vacuous floor for PSD covariances
      optim::BlockProgram::Constraint leak;
      leak.A = identity_blocks(view->F(i).adjoint() * view->F(i));
      leak.bound = (*eta)[i];
      leak.upper = false;
      leak.scale = std::max((*eta)[i], 1.0);
      prog.constraints.push_back(std::move(leak));
    }
    // Relax every row by the free scalar in its own scale units.
    for (auto& row : prog.constraints) row.free_coeff = row.upper ? -row.scale : row.scale;

    // Exit as soon as the scalar certifies strict feasibility, or once the
    // stage-converged central-path gap bound rules a feasible point out.
    const double m = margin;
    const double nu = static_cast<double>(prog.constraints.size() + c.K_u * c.t_u);
    prog.early_stop = [m, nu](const std::vector<ComplexMatrix>&, double s, double mu,
                              bool stage_converged) {
      if (s < -m) return true;
      return stage_converged && s - mu * nu > 1e-4;
    };

    // Start: small covariances plus a scalar dominating every violation.
    std::vector<ComplexMatrix> init(c.K_u);
    for (int k = 0; k < c.K_u; ++k)
      init[k] = (c.P / (2.0 * c.K_u * c.t_u)) * ComplexMatrix::Identity(c.t_u, c.t_u);
    double worst = 0.0;
    for (const auto& row : prog.constraints) {
      double val = 0.0;
      for (int k = 0; k < c.K_u; ++k)
        val += (row.A[k].size() > 0) ? (row.A[k].adjoint() * init[k]).trace().real() : 0.0;
      double slack = (row.upper ? row.bound - val : val - row.bound) / row.scale;
      worst = std::min(worst, slack);
    }
    const double s0 = -worst + 1.0;

    optim::SolverOptions local = *opts;
    local.barrier_mu_min = 1e-8;
    optim::BlockSolution sol = optim::barrier_concave_max(prog, init, s0, local);
    if (!sol.feasible_start_found) return false;

    // Verdict on the actual violation of the returned covariances.
    double violation = 0.0;
    for (const auto& row : prog.constraints) {
      double val = 0.0;
      for (int k = 0; k < c.K_u; ++k)
        val += (row.A[k].size() > 0) ? (row.A[k].adjoint() * sol.blocks[k]).trace().real() : 0.0;
      double slack = (row.upper ? row.bound - val : val - row.bound) / row.scale;
      violation = std::max(violation, -slack);
    }
    if (violation < opts->infeasibility_tol) {
      best_blocks = sol.blocks;
      have_blocks = true;
      return true;
    }
    return false;
  }
};

}  // namespace

SdpResult sdp_maxmin(const CsiView& view, const NetworkConfig& cfg,
                     const std::vector<double>& eta, const optim::SolverOptions& opts) {
  if (cfg.r_u != 1) throw std::invalid_argument("sdp_maxmin: requires single-antenna UCRs");
  if (static_cast<int>(eta.size()) != cfg.K)
    throw std::invalid_argument("sdp_maxmin: need one leakage floor per ICR");
  for (double e : eta)
    if (e < 0) throw std::invalid_argument("sdp_maxmin: leakage floors must be nonnegative");

  SdpResult res;
  FeasibilityProbe probe;
  probe.view = &view;
  probe.cfg = &cfg;
  probe.eta = &eta;
  probe.opts = &opts;

  if (!probe(0.0)) {
    res.infeasible_at_zero = true;
    res.precoder.scheme = "sdp_maxmin";
    res.precoder.W = ComplexMatrix::Zero(cfg.t_u, cfg.K_u);
    res.precoder.cols_per_user.assign(cfg.K_u, 1);
    return res;
  }

  // The per-user matched-filter bound caps the achievable minimum.
  double t_ub = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.K_u; ++k)
    t_ub = std::min(t_ub, cfg.P * view.H(k).squaredNorm() / cfg.sigma_k2[k]);
  t_ub = t_ub * (1.0 + 1e-3) + 1e-9;

  optim::SolveTrace trace;
  double monotone_max_feasible = 0.0;
  double monotone_min_infeasible = std::numeric_limits<double>::infinity();
  auto oracle = [&](double t) {
    bool ok = probe(t);
    if (ok) {
      if (t >= monotone_min_infeasible)
        throw std::runtime_error("sdp_maxmin: feasibility oracle not monotone");
      monotone_max_feasible = std::max(monotone_max_feasible, t);
    } else {
      if (t < monotone_max_feasible)
        throw std::runtime_error("sdp_maxmin: feasibility oracle not monotone");
      monotone_min_infeasible = std::min(monotone_min_infeasible, t);
    }
    return ok;
  };
  double t_lo = optim::bisect_feasibility(oracle, 0.0, t_ub, opts.bisection_tol,
                                          /*relative=*/true, &trace);
  res.t_lo = t_lo;
  res.t_hi = trace.violation.empty() ? t_ub : trace.violation.back();
  res.t_star = t_lo;
  res.certificate_ok = (monotone_max_feasible >= t_lo) &&
                       (res.t_hi <= monotone_min_infeasible * (1 + 1e-12));

  // Rank-1 extraction: principal eigenpair of each covariance.
  Precoder p;
  p.W = ComplexMatrix::Zero(cfg.t_u, cfg.K_u);
  p.cols_per_user.assign(cfg.K_u, 1);
  p.scheme = "sdp_maxmin";
  for (int k = 0; k < cfg.K_u; ++k) {
    auto eig = mathcore::hermitian_eig(probe.best_blocks[k]);
    const double l1 = std::max(eig.eigenvalues(0), 0.0);
    if (l1 > 0.0) {
      p.W.col(k) = std::sqrt(l1) * eig.eigenvectors.col(0);
      if (eig.eigenvalues.size() > 1 && eig.eigenvalues(1) / l1 > 1e-6)
        p.rank_violation = true;
    }
  }
  p.W = scale_into_feasible(p.W, cfg, view.N());

  // Achieved min partial SINR of the extracted beamformers.
  const ComplexMatrix prod = view.H_u() * p.W;
  double min_sinr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.K_u; ++k) {
    double leak = 0.0;
    for (int j = 0; j < cfg.K_u; ++j)
      if (j != k) leak += std::norm(prod(k, j));
    min_sinr = std::min(min_sinr, std::norm(prod(k, k)) / (leak + cfg.sigma_k2[k]));
  }
  p.extracted_min_sinr = min_sinr;
  p.objective = min_sinr;
  check_feasible(p.W, cfg, view.N(), "sdp_maxmin");
  res.precoder = std::move(p);
  return res;
}

}  // namespace prescient::precoders
