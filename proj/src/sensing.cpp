// SPDX-License-Identifier: Apache-2.0
#include "prescient/sensing.hpp"

#include <cmath>
#include <stdexcept>

#include "prescient/mathcore.hpp"

namespace prescient::sensing {

using mathcore::erlang_survival;
using mathcore::erlang_survival_inverse;
using mathcore::gaussian_q;
using mathcore::marcum_q;

double calibrate_threshold(double eps2, int M_tilde, int r_I, double P_f) {
  if (eps2 <= 0) throw std::invalid_argument("calibrate_threshold: eps2 must be positive");
  const int m = M_tilde * r_I;
  return eps2 * erlang_survival_inverse(m, P_f);
}

SensingModel SensingModel::calibrate(const NetworkConfig& cfg) {
  SensingModel model;
  model.M_tilde = cfg.M_tilde;
  model.r_I = cfg.r_I;
  model.P_f = cfg.P_f;
  model.icr.resize(cfg.K);
  for (int i = 0; i < cfg.K; ++i) {
    model.icr[i].eps2 = cfg.eps2[i];
    model.icr[i].lambda = calibrate_threshold(cfg.eps2[i], cfg.M_tilde, cfg.r_I, cfg.P_f);
  }
  return model;
}

double false_alarm_prob(const IcrDetector& d, int samples) {
  return erlang_survival(samples, d.lambda / d.eps2);
}

double detection_prob_exact(const IcrDetector& d, int samples, double rho) {
  if (rho < 0) throw std::invalid_argument("detection_prob_exact: rho must be >= 0");
  // The energy statistic over 2*samples real components has noncentrality
  // 2*rho on the unit-variance scale.
  return marcum_q(samples, std::sqrt(2.0 * rho), std::sqrt(2.0 * d.lambda / d.eps2));
}

double detection_prob_clt(const IcrDetector& d, int samples, double rho) {
  if (rho < 0) throw std::invalid_argument("detection_prob_clt: rho must be >= 0");
  const double eps2 = d.eps2;
  const double num = d.lambda - eps2 * samples - rho;
  const double den = std::sqrt(eps2) * std::sqrt(eps2 * samples + 2.0 * rho);
  return gaussian_q(num / den);
}

double detection_prob_avg_sigma(const IcrDetector& d, int samples, double sigma_z2) {
  if (sigma_z2 <= 0) throw std::invalid_argument("detection_prob_avg_sigma: variance must be positive");
  return erlang_survival(samples, d.lambda / sigma_z2);
}

double sigma_z2_statistical(const NetworkConfig& cfg, int i, double trace_wwh) {
  return 2.0 * cfg.sigma_f2.at(i) * trace_wwh + 2.0 * cfg.P_t * cfg.t_p * cfg.sigma_d2.at(i) +
         cfg.eps2.at(i);
}

double sigma_z2_view(const CsiView& view, int i, const ComplexMatrix& w) {
  const NetworkConfig& cfg = view.cfg();
  double signal_var;
  if (view.has_instantaneous_F()) {
    signal_var = (2.0 / cfg.r_I) * (view.F(i) * w).squaredNorm();
  } else {
    signal_var = 2.0 * cfg.sigma_f2.at(i) * w.squaredNorm();
  }
  return signal_var + 2.0 * cfg.P_t * cfg.t_p * cfg.sigma_d2.at(i) + cfg.eps2.at(i);
}

double detection_prob_avg(const SensingModel& model, int i, const ComplexMatrix& w,
                          const NetworkConfig& cfg) {
  const double sz2 = sigma_z2_statistical(cfg, i, w.squaredNorm());
  return detection_prob_avg_sigma(model.icr.at(i), model.samples(), sz2);
}

std::vector<DetectionOutcome> simulate_sensing(const SensingModel& model,
                                               const ComplexMatrix& w,
                                               const ChannelSet& channels,
                                               const ComplexMatrix& symbols,
                                               const NetworkConfig& cfg,
                                               std::uint64_t noise_seed) {
  const int n = cfg.M_tilde;
  Rng rng = Rng::stream(noise_seed, 0x5E5Eull);
  std::vector<DetectionOutcome> out(cfg.K);

  // Underlay transmit signal over the sensing window; empty precoder = idle.
  ComplexMatrix x(cfg.t_u, n);
  if (w.size() > 0) {
    if (symbols.rows() != w.cols() || symbols.cols() < n)
      throw std::invalid_argument("simulate_sensing: symbol block does not match the precoder");
    x = w * symbols.leftCols(n);
  } else {
    x.setZero();
  }

  // Primary transmit block, per-antenna power P_t / t_p.
  ComplexMatrix sp(cfg.t_p, n);
  if (cfg.P_t > 0)
    sp = network::draw_psk_block(cfg.t_p, n, cfg.psk_order, cfg.P_t / cfg.t_p, rng);
  else
    sp.setZero();

  for (int i = 0; i < cfg.K; ++i) {
    const ComplexMatrix mu = channels.F[i] * x + channels.D[i] * sp;  // r_I x n
    const double eps2 = model.icr[i].eps2;
    double energy = 0.0;
    double mu_energy = 0.0;
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < cfg.r_I; ++r) {
        std::complex<double> z = mu(r, c) + rng.cnormal(eps2);
        energy += std::norm(z);
        mu_energy += std::norm(mu(r, c));
      }
    out[i].statistic = energy;
    out[i].decision = energy > model.icr[i].lambda;
    out[i].missed = out[i].decision ? 0 : 1;
    out[i].rho = mu_energy / eps2;
  }
  return out;
}

double expected_icr_interference(const NetworkConfig& cfg,
                                 const std::vector<double>& detection_probs) {
  if (static_cast<int>(detection_probs.size()) != cfg.K)
    throw std::invalid_argument("expected_icr_interference: need one probability per ICR");
  double total = 0.0;
  for (int i = 0; i < cfg.K; ++i) {
    const double pd = detection_probs[i];
    if (pd < 0.0 || pd > 1.0)
      throw std::invalid_argument("expected_icr_interference: probability outside [0,1]");
    total += (1.0 - pd) * cfg.P_i[i] * cfg.r_I * cfg.sigma_v2[i];
  }
  return total;
}

}  // namespace prescient::sensing
