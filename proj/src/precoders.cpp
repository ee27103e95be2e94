// SPDX-License-Identifier: Apache-2.0
#include "prescient/precoders.hpp"

#include <cmath>
#include <stdexcept>

#include "prescient/rng.hpp"

namespace prescient::precoders {

namespace {

constexpr double kLog2 = 0.6931471805599453094;  // ln 2

void require_single_antenna_ucrs(const NetworkConfig& cfg, const char* who) {
  if (cfg.r_u != 1)
    throw std::invalid_argument(std::string(who) + ": requires single-antenna UCRs");
}

}  // namespace

int Precoder::col_offset(int k) const {
  int off = 0;
  for (int j = 0; j < k; ++j) off += cols_per_user.at(j);
  return off;
}

ComplexMatrix Precoder::block(int k) const {
  return W.middleCols(col_offset(k), cols_per_user.at(k));
}

std::vector<ComplexMatrix> Precoder::user_covariances() const {
  std::vector<ComplexMatrix> q;
  q.reserve(cols_per_user.size());
  for (size_t k = 0; k < cols_per_user.size(); ++k) {
    ComplexMatrix wk = block(static_cast<int>(k));
    q.push_back(wk * wk.adjoint());
  }
  return q;
}

double transmit_power(const ComplexMatrix& w) { return w.squaredNorm(); }

double pr_interference(const ComplexMatrix& w, const ComplexMatrix& n) {
  if (n.rows() == 0) return 0.0;
  return (n * w).squaredNorm();
}

ComplexMatrix scale_into_feasible(const ComplexMatrix& w, const NetworkConfig& cfg,
                                  const ComplexMatrix& n) {
  const double pw = transmit_power(w);
  if (pw == 0.0) return w;
  double c = 1.0;
  if (pw > cfg.P) c = std::min(c, std::sqrt(cfg.P / pw));
  const double pr = pr_interference(w, n);
  if (pr > cfg.xi_p) c = std::min(c, std::sqrt(cfg.xi_p / pr));
  return c * w;
}

ComplexMatrix scale_to_boundary(const ComplexMatrix& w, const NetworkConfig& cfg,
                                const ComplexMatrix& n) {
  const double pw = transmit_power(w);
  if (pw == 0.0) return w;
  double c = std::sqrt(cfg.P / pw);
  const double pr = pr_interference(w, n);
  if (pr > 0.0) c = std::min(c, std::sqrt(cfg.xi_p / pr));
  return c * w;
}

void check_feasible(const ComplexMatrix& w, const NetworkConfig& cfg,
                    const ComplexMatrix& n, const char* who) {
  const double tol = mathcore::tolerances().feasibility_rel;
  if (transmit_power(w) > cfg.P * (1.0 + tol))
    throw std::invalid_argument(std::string(who) + ": power budget violated");
  if (pr_interference(w, n) > cfg.xi_p * (1.0 + tol))
    throw std::invalid_argument(std::string(who) + ": PR interference cap violated");
}

// ---------------------------------------------------------------------------
// Sum-rate objective and gradient.

namespace {

struct IcrTerms {
  double c = 0.0;        // interference weight P_i * r_I * sigma_v2
  double lambda = 0.0;   // detector threshold
  double sigma_z2 = 0.0; // averaged sample variance at the current precoder
  double pd = 0.0;       // averaged detection probability
};

std::vector<IcrTerms> icr_terms(const ComplexMatrix& w, const CsiView& view,
                                const SensingModel& model) {
  const NetworkConfig& cfg = view.cfg();
  std::vector<IcrTerms> terms(cfg.K);
  const int m = model.samples();
  for (int i = 0; i < cfg.K; ++i) {
    terms[i].c = cfg.P_i[i] * cfg.r_I * cfg.sigma_v2[i];
    terms[i].lambda = model.icr[i].lambda;
    terms[i].sigma_z2 = sensing::sigma_z2_view(view, i, w);
    terms[i].pd = mathcore::erlang_survival(m, terms[i].lambda / terms[i].sigma_z2);
  }
  return terms;
}

double expected_interference(const std::vector<IcrTerms>& terms) {
  double total = 0.0;
  for (const auto& t : terms) total += t.c * (1.0 - t.pd);
  return total;
}

}  // namespace

double sum_rate_objective(const ComplexMatrix& w, const CsiView& view,
                          const SensingModel& model) {
  const NetworkConfig& cfg = view.cfg();
  require_single_antenna_ucrs(cfg, "sum_rate_objective");
  const double ibar = expected_interference(icr_terms(w, view, model));
  const ComplexMatrix p = view.H_u() * w;  // K_u x K_u, p(k, j) = h_k w_j
  double rate = 0.0;
  for (int k = 0; k < cfg.K_u; ++k) {
    double a = std::norm(p(k, k));
    double leak = 0.0;
    for (int j = 0; j < cfg.K_u; ++j)
      if (j != k) leak += std::norm(p(k, j));
    const double l = leak + ibar + cfg.sigma_k2[k];
    rate += std::log2(1.0 + a / l);
  }
  return rate;
}

ComplexMatrix sum_rate_gradient(const ComplexMatrix& w, const CsiView& view,
                                const SensingModel& model) {
  const NetworkConfig& cfg = view.cfg();
  require_single_antenna_ucrs(cfg, "sum_rate_gradient");
  const int m = model.samples();
  auto terms = icr_terms(w, view, model);
  const double ibar = expected_interference(terms);

  // d(expected interference)/dW = Kappa * W with Kappa negative semidefinite.
  ComplexMatrix kappa = ComplexMatrix::Zero(cfg.t_u, cfg.t_u);
  for (int i = 0; i < cfg.K; ++i) {
    const double x = terms[i].lambda / terms[i].sigma_z2;
    const double dsurv = mathcore::erlang_survival_deriv(m, x);
    const double coef =
        terms[i].c * dsurv * terms[i].lambda / (terms[i].sigma_z2 * terms[i].sigma_z2);
    if (coef != 0.0) kappa += coef * view.leakage_form(i);
  }

  const ComplexMatrix p = view.H_u() * w;
  Eigen::VectorXd a(cfg.K_u), l(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    a(k) = std::norm(p(k, k));
    double leak = 0.0;
    for (int j = 0; j < cfg.K_u; ++j)
      if (j != k) leak += std::norm(p(k, j));
    l(k) = leak + ibar + cfg.sigma_k2[k];
  }
  double shared = 0.0;  // sum_k (1/(L_k + a_k) - 1/L_k)
  for (int k = 0; k < cfg.K_u; ++k) shared += 1.0 / (l(k) + a(k)) - 1.0 / l(k);

  ComplexMatrix grad(cfg.t_u, cfg.K_u);
  const ComplexMatrix kw = kappa * w;
  for (int mcol = 0; mcol < cfg.K_u; ++mcol) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(cfg.t_u);
    for (int k = 0; k < cfg.K_u; ++k) {
      const Eigen::VectorXcd hk = view.H_u().row(k).adjoint();  // h_k^H
      if (k == mcol) {
        g += hk * (p(k, mcol) / (l(k) + a(k)));
      } else {
        g += hk * (p(k, mcol) * (1.0 / (l(k) + a(k)) - 1.0 / l(k)));
      }
    }
    g += shared * kw.col(mcol);
    grad.col(mcol) = g / kLog2;
  }
  return grad;
}

// ---------------------------------------------------------------------------

Precoder rci(const CsiView& view, const NetworkConfig& cfg) {
  require_single_antenna_ucrs(cfg, "rci");
  if (cfg.K_u > cfg.t_u) throw std::invalid_argument("rci: more users than antennas");
  const ComplexMatrix& h = view.H_u();
  ComplexMatrix gram = h * h.adjoint() +
                       (cfg.K_u / cfg.P) * ComplexMatrix::Identity(cfg.K_u, cfg.K_u);
  ComplexMatrix w0 = h.adjoint() * gram.llt().solve(ComplexMatrix::Identity(cfg.K_u, cfg.K_u));
  Precoder out;
  out.W = scale_to_boundary(w0, cfg, view.N());
  out.cols_per_user.assign(cfg.K_u, 1);
  out.scheme = "rci";
  check_feasible(out.W, cfg, view.N(), "rci");
  return out;
}

Precoder multicast(const CsiView& view, const NetworkConfig& cfg, McPowerSplit split) {
  require_single_antenna_ucrs(cfg, "multicast");
  ComplexMatrix m = ComplexMatrix::Zero(cfg.t_u, cfg.t_u);
  for (int i = 0; i < cfg.K; ++i) {
    const double g = cfg.P_i[i] * cfg.r_I * cfg.sigma_v2[i];
    m += g * (view.F(i).adjoint() * view.F(i));
  }
  Precoder out;
  out.scheme = "multicast";
  out.cols_per_user.assign(cfg.K_u, 1);
  out.W = ComplexMatrix::Zero(cfg.t_u, cfg.K_u);
  if (m.norm() == 0.0) {
    out.zero_leakage_warning = true;
    out.objective = 0.0;
    return out;
  }
  auto eig = mathcore::hermitian_eig(m);
  const int cols = std::min<int>(cfg.K_u, cfg.t_u);
  Eigen::VectorXd lam = eig.eigenvalues.head(cols).cwiseMax(0.0);
  // Numerically zero modes carry no leakage; keep them strictly at zero so a
  // rank-deficient form concentrates power on the true directions.
  for (int k = 0; k < cols; ++k)
    if (lam(k) <= 1e-12 * lam(0)) lam(k) = 0.0;
  double lam_sum = lam.sum();
  if (lam_sum <= 0.0) {
    out.zero_leakage_warning = true;
    out.objective = 0.0;
    return out;
  }
  Eigen::VectorXd power = Eigen::VectorXd::Zero(cols);
  if (split == McPowerSplit::Dominant)
    power(0) = cfg.P;
  else
    power = (cfg.P / lam_sum) * lam;
  for (int k = 0; k < cols; ++k)
    out.W.col(k) = std::sqrt(power(k)) * eig.eigenvectors.col(k);
  out.W = scale_into_feasible(out.W, cfg, view.N());
  double obj = 0.0;
  for (int i = 0; i < cfg.K; ++i) {
    const double g = cfg.P_i[i] * cfg.r_I * cfg.sigma_v2[i];
    obj += g * (view.F(i) * out.W).squaredNorm();
  }
  out.objective = obj;
  check_feasible(out.W, cfg, view.N(), "multicast");
  return out;
}

Precoder linear_combination(const CsiView& view, const NetworkConfig& cfg,
                            const SensingModel& model, const optim::SolverOptions& opts) {
  Precoder ci = rci(view, cfg);
  Precoder mc = multicast(view, cfg);
  auto mixed = [&](double alpha) {
    ComplexMatrix w = alpha * ci.W + (1.0 - alpha) * mc.W;
    if (w.norm() < 1e-300) return w;
    return scale_to_boundary(w, cfg, view.N());
  };
  auto value = [&](double alpha) {
    ComplexMatrix w = mixed(alpha);
    if (w.size() == 0 || w.norm() == 0.0) return 0.0;
    return sum_rate_objective(w, view, model);
  };
  const double alpha = optim::golden_line_search(value, opts.line_search_grid,
                                                 opts.line_search_tol);
  Precoder out;
  out.W = mixed(alpha);
  out.cols_per_user.assign(cfg.K_u, 1);
  out.scheme = "linear_combination";
  out.mix_alpha = alpha;
  out.objective = value(alpha);
  check_feasible(out.W, cfg, view.N(), "linear_combination");
  return out;
}

Precoder prescient_gp(const CsiView& view, const NetworkConfig& cfg,
                      const SensingModel& model, const Precoder& init,
                      const optim::SolverOptions& opts) {
  require_single_antenna_ucrs(cfg, "prescient_gp");
  check_feasible(init.W, cfg, view.N(), "prescient_gp init");
  optim::AscentOracle oracle;
  oracle.value = [&](const ComplexMatrix& w) { return sum_rate_objective(w, view, model); };
  oracle.gradient = [&](const ComplexMatrix& w) { return sum_rate_gradient(w, view, model); };
  oracle.project = [&](const ComplexMatrix& w) { return scale_into_feasible(w, cfg, view.N()); };
  auto [w, trace] = optim::projected_ascent(oracle, init.W, opts);
  Precoder out;
  out.W = w;
  out.cols_per_user.assign(cfg.K_u, 1);
  out.scheme = "prescient_gp";
  out.iterations = trace.iterations;
  out.objective = trace.objective.back();
  check_feasible(out.W, cfg, view.N(), "prescient_gp");
  return out;
}

Precoder prescient_gp_multistart(const CsiView& view, const NetworkConfig& cfg,
                                 const SensingModel& model, std::uint64_t seed,
                                 int random_inits, const optim::SolverOptions& opts) {
  Precoder best;
  bool have = false;
  auto consider = [&](const Precoder& init) {
    Precoder run = prescient_gp(view, cfg, model, init, opts);
    if (!have || run.objective > best.objective) {
      best = run;
      have = true;
    }
  };
  consider(rci(view, cfg));
  for (int r = 0; r < random_inits; ++r) {
    Rng rng = Rng::stream(seed, 0xA11C0000ull + r);
    ComplexMatrix w(cfg.t_u, cfg.K_u);
    for (int i = 0; i < cfg.t_u; ++i)
      for (int j = 0; j < cfg.K_u; ++j) w(i, j) = rng.cnormal(1.0);
    Precoder init;
    init.W = scale_to_boundary(w, cfg, view.N());
    init.cols_per_user.assign(cfg.K_u, 1);
    consider(init);
  }
  return best;
}

std::vector<double> default_leakage_floors(const NetworkConfig& cfg, double fraction) {
  std::vector<double> eta(cfg.K);
  for (int i = 0; i < cfg.K; ++i) eta[i] = fraction * cfg.sigma_f2[i] * cfg.P;
  return eta;
}

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

SinrReport rates_with_noise_floors(const Precoder& p, const std::vector<ComplexMatrix>& h,
                                   const NetworkConfig& cfg,
                                   const std::vector<ComplexMatrix>& interference_cov,
                                   double extra_noise) {
  const int ku = cfg.K_u;
  auto q = p.user_covariances();
  SinrReport rep;
  rep.gamma.resize(ku);
  rep.beta.resize(ku);
  rep.rate.resize(ku);
  for (int k = 0; k < ku; ++k) {
    const ComplexMatrix& hk = h[k];
    const int ru = static_cast<int>(hk.rows());
    ComplexMatrix signal = hk * q[k] * hk.adjoint();
    ComplexMatrix cross = ComplexMatrix::Zero(ru, ru);
    for (int j = 0; j < ku; ++j)
      if (j != k) cross += hk * q[j] * hk.adjoint();
    ComplexMatrix noise0 = cross + cfg.sigma_k2[k] * ComplexMatrix::Identity(ru, ru);
    ComplexMatrix noise = noise0 + extra_noise * ComplexMatrix::Identity(ru, ru);
    if (!interference_cov.empty()) noise += interference_cov[k];
    auto log2det_ratio = [&](const ComplexMatrix& nz) {
      ComplexMatrix m = ComplexMatrix::Identity(ru, ru) + nz.llt().solve(signal);
      Eigen::PartialPivLU<ComplexMatrix> lu(m);
      double ld = 0.0;
      for (int i = 0; i < ru; ++i) ld += std::log(std::abs(lu.matrixLU()(i, i)));
      return ld / kLog2;
    };
    const double rate = log2det_ratio(noise);
    const double rate0 = log2det_ratio(noise0);
    rep.rate(k) = rate;
    rep.gamma(k) = std::exp2(rate) - 1.0;
    rep.beta(k) = std::exp2(rate0) - 1.0;
    rep.sum_rate += rate;
  }
  return rep;
}

}  // namespace

SinrReport predicted_sinr(const Precoder& p, const CsiView& view, const SensingModel& model) {
  const NetworkConfig& cfg = view.cfg();
  std::vector<double> pd(cfg.K);
  for (int i = 0; i < cfg.K; ++i) {
    const double sz2 = sensing::sigma_z2_view(view, i, p.W);
    pd[i] = sensing::detection_prob_avg_sigma(model.icr[i], model.samples(), sz2);
  }
  const double ibar = sensing::expected_icr_interference(cfg, pd);
  std::vector<ComplexMatrix> h;
  for (int k = 0; k < cfg.K_u; ++k) h.push_back(view.H(k));
  return rates_with_noise_floors(p, h, cfg, {}, ibar);
}

RealizedEvaluation realized_sinr(const Precoder& p, const ChannelSet& channels,
                                 const NetworkConfig& cfg, const SensingModel& model,
                                 const ComplexMatrix& symbols, std::uint64_t seed) {
  RealizedEvaluation ev;
  ev.outcomes = sensing::simulate_sensing(model, p.W, channels, symbols, cfg, seed);
  std::vector<ComplexMatrix> cov(cfg.K_u);
  for (int k = 0; k < cfg.K_u; ++k) {
    cov[k] = ComplexMatrix::Zero(cfg.r_u, cfg.r_u);
    for (int i = 0; i < cfg.K; ++i) {
      if (ev.outcomes[i].missed) {
        const ComplexMatrix& v = channels.V[k][i];
        cov[k] += cfg.P_i[i] * (v * v.adjoint());
      }
    }
  }
  ev.realized_interference = cov[0].trace().real();
  std::vector<ComplexMatrix> h;
  for (int k = 0; k < cfg.K_u; ++k) h.push_back(channels.H[k]);
  ev.report = rates_with_noise_floors(p, h, cfg, cov, 0.0);
  return ev;
}

SinrReport evaluate_sinr(const Precoder& p, const ChannelSet& channels, const CsiView& view,
                         const NetworkConfig& cfg, const SensingModel& model,
                         InterferenceMode mode, std::uint64_t seed) {
  if (mode == InterferenceMode::Predicted) return predicted_sinr(p, view, model);
  ComplexMatrix symbols =
      network::draw_symbol_streams(cfg, static_cast<int>(p.W.cols()), cfg.M_tilde, seed);
  return realized_sinr(p, channels, cfg, model, symbols, seed).report;
}

}  // namespace prescient::precoders
