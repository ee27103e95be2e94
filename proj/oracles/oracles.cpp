// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <stdexcept>

#include "prescient/rng.hpp"

namespace prescient::oracles {

namespace {

using big = boost::multiprecision::cpp_bin_float_50;

big erlang_survival_big(int m, const big& x) {
  big term = exp(-x);
  big sum = term;
  for (int r = 1; r < m; ++r) {
    term *= x / r;
    sum += term;
  }
  return sum;
}

}  // namespace

double erlang_survival_highprec(int m, double x) {
  return static_cast<double>(erlang_survival_big(m, big(x)));
}

double erlang_survival_inverse_bisect(int m, double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("inverse_bisect: p outside (0,1)");
  big lo = 0, hi = 1;
  while (erlang_survival_big(m, hi) > p) hi *= 2;
  for (int it = 0; it < 400; ++it) {
    big mid = (lo + hi) / 2;
    if (erlang_survival_big(m, mid) > p)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<double>((lo + hi) / 2);
}

double gaussian_q_inverse_bisect(double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("gaussian_q_inverse: p outside (0,1)");
  double lo = -40, hi = 40;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double q = 0.5 * std::erfc(mid * 0.7071067811865475244);
    if (q > p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

McEstimate bernoulli_estimate(long hits, long trials) {
  McEstimate e;
  e.trials = trials;
  e.mean = static_cast<double>(hits) / trials;
  e.std_error = std::sqrt(std::max(e.mean * (1.0 - e.mean), 1e-300) / trials);
  return e;
}

}  // namespace

McEstimate marcum_mc(int order, double a, double b, long trials, std::uint64_t seed) {
  Rng rng(seed);
  const double threshold = b * b;
  // Noncentrality a^2 on the 2*order-component unit-variance scale equals
  // total complex mean energy a^2 when each complex sample is CN(mu, 2).
  const double mu = a / std::sqrt(static_cast<double>(order));
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    double energy = 0.0;
    for (int k = 0; k < order; ++k) {
      std::complex<double> z = std::complex<double>(mu, 0.0) + rng.cnormal(2.0);
      energy += std::norm(z);
    }
    if (energy > threshold) ++hits;
  }
  return bernoulli_estimate(hits, trials);
}

McEstimate detection_rate_mc(double eps2, double lambda, int M_tilde, int r_I, double rho,
                             long trials, std::uint64_t seed) {
  Rng rng(seed);
  const int m = M_tilde * r_I;
  const double mu = std::sqrt(rho * eps2 / m);  // spread the mean energy evenly
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    double energy = 0.0;
    for (int k = 0; k < m; ++k) {
      std::complex<double> z = std::complex<double>(mu, 0.0) + rng.cnormal(eps2);
      energy += std::norm(z);
    }
    if (energy > lambda) ++hits;
  }
  return bernoulli_estimate(hits, trials);
}

McEstimate gaussian_energy_rate_mc(double sigma_z2, double lambda, int M_tilde, int r_I,
                                   long trials, std::uint64_t seed) {
  Rng rng(seed);
  const int m = M_tilde * r_I;
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    double energy = 0.0;
    for (int k = 0; k < m; ++k) energy += std::norm(rng.cnormal(sigma_z2));
    if (energy > lambda) ++hits;
  }
  return bernoulli_estimate(hits, trials);
}

McEstimate detection_avg_network_mc(const network::NetworkConfig& cfg, double trace_wwh,
                                    double lambda, long trials, std::uint64_t seed) {
  Rng rng(seed);
  // Fixed random precoder, scaled to the requested transmit power.
  Eigen::MatrixXcd w(cfg.t_u, cfg.K_u);
  for (int i = 0; i < cfg.t_u; ++i)
    for (int j = 0; j < cfg.K_u; ++j) w(i, j) = rng.cnormal(1.0);
  w *= std::sqrt(trace_wwh) / w.norm();

  const double eps2 = cfg.eps2.at(0);
  const double sf2 = cfg.sigma_f2.at(0);
  const double sd2 = cfg.sigma_d2.at(0);
  long hits = 0;
  for (long t = 0; t < trials; ++t) {
    double energy = 0.0;
    Eigen::MatrixXcd f(cfg.r_I, cfg.t_u), d(cfg.r_I, cfg.t_p);
    for (int r = 0; r < cfg.r_I; ++r) {
      for (int c = 0; c < cfg.t_u; ++c) f(r, c) = rng.cnormal(sf2);
      for (int c = 0; c < cfg.t_p; ++c) d(r, c) = rng.cnormal(sd2);
    }
    network::ComplexMatrix su =
        network::draw_psk_block(cfg.K_u, cfg.M_tilde, cfg.psk_order, 1.0, rng);
    network::ComplexMatrix sp =
        network::draw_psk_block(cfg.t_p, cfg.M_tilde, cfg.psk_order, cfg.P_t / cfg.t_p, rng);
    Eigen::MatrixXcd mu = f * (w * su) + d * sp;
    for (int c = 0; c < cfg.M_tilde; ++c)
      for (int r = 0; r < cfg.r_I; ++r) energy += std::norm(mu(r, c) + rng.cnormal(eps2));
    if (energy > lambda) ++hits;
  }
  return bernoulli_estimate(hits, trials);
}

McEstimate realized_interference_mc(const network::NetworkConfig& cfg,
                                    const std::vector<double>& miss_prob, long trials,
                                    std::uint64_t seed) {
  Rng rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (long t = 0; t < trials; ++t) {
    double interference = 0.0;
    for (int i = 0; i < cfg.K; ++i) {
      const bool missed = rng.uniform() < miss_prob.at(i);
      if (!missed) continue;
      double vnorm2 = 0.0;
      for (int a = 0; a < cfg.r_I; ++a) vnorm2 += std::norm(rng.cnormal(cfg.sigma_v2[i]));
      interference += vnorm2 * cfg.P_i[i];
    }
    sum += interference;
    sumsq += interference * interference;
  }
  McEstimate e;
  e.trials = trials;
  e.mean = sum / trials;
  double var = std::max(sumsq / trials - e.mean * e.mean, 0.0);
  e.std_error = std::sqrt(var / trials);
  return e;
}

Waterfill waterfilling(const std::vector<double>& gains2, double total_power) {
  Waterfill out;
  out.power.assign(gains2.size(), 0.0);
  if (gains2.empty() || total_power <= 0) return out;
  // Bisection on the water level: p_m = max(0, 1/nu - 1/g2_m).
  auto used = [&](double inv_nu) {
    double s = 0.0;
    for (double g2 : gains2)
      if (g2 > 0) s += std::max(0.0, inv_nu - 1.0 / g2);
    return s;
  };
  double lo = 0.0, hi = total_power + 1.0;
  for (double g2 : gains2)
    if (g2 > 0) hi = std::max(hi, total_power + 1.0 / g2);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (used(mid) < total_power)
      lo = mid;
    else
      hi = mid;
  }
  const double inv_nu = 0.5 * (lo + hi);
  for (size_t m = 0; m < gains2.size(); ++m) {
    if (gains2[m] > 0) out.power[m] = std::max(0.0, inv_nu - 1.0 / gains2[m]);
    out.objective += std::log2(1.0 + gains2[m] * out.power[m]);
  }
  return out;
}

Eigen::MatrixXcd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXcd&)>& f, const Eigen::MatrixXcd& w,
    double step) {
  Eigen::MatrixXcd g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Eigen::MatrixXcd wp = w, wm = w;
      wp(i, j) += step;
      wm(i, j) -= step;
      const double dre = (f(wp) - f(wm)) / (2 * step);
      wp = w;
      wm = w;
      wp(i, j) += std::complex<double>(0, step);
      wm(i, j) -= std::complex<double>(0, step);
      const double dim = (f(wp) - f(wm)) / (2 * step);
      g(i, j) = 0.5 * std::complex<double>(dre, dim);
    }
  return g;
}

double dense_grid_argmax(const std::function<double(double)>& f, int points) {
  double best_x = 0.0, best_f = f(0.0);
  for (int i = 1; i < points; ++i) {
    double x = static_cast<double>(i) / (points - 1);
    double v = f(x);
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return best_x;
}

double simplex_linear_max_grid(const std::vector<double>& lam, double total_power) {
  const int n = static_cast<int>(lam.size());
  if (n == 0) return 0.0;
  auto value = [&](const std::vector<double>& p) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += lam[i] * p[i];
    return v;
  };
  // Coarse enumeration over compositions, then local refinement by pairwise
  // mass transfer.
  const int steps = 20;
  std::vector<double> best(n, 0.0);
  best[0] = total_power;
  double best_v = value(best);
  std::vector<int> comp(n, 0);
  std::function<void(int, int)> rec = [&](int idx, int remaining) {
    if (idx == n - 1) {
      comp[idx] = remaining;
      std::vector<double> p(n);
      for (int i = 0; i < n; ++i) p[i] = total_power * comp[i] / steps;
      double v = value(p);
      if (v > best_v) {
        best_v = v;
        best = p;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      comp[idx] = c;
      rec(idx + 1, remaining - c);
    }
  };
  rec(0, steps);
  double shift = total_power / steps;
  for (int round = 0; round < 200; ++round) {
    bool improved = false;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        if (a == b || best[a] < shift) continue;
        std::vector<double> p = best;
        p[a] -= shift;
        p[b] += shift;
        double v = value(p);
        if (v > best_v + 1e-15) {
          best_v = v;
          best = p;
          improved = true;
        }
      }
    if (!improved) shift *= 0.5;
    if (shift < 1e-12 * total_power) break;
  }
  return best_v;
}

}  // namespace prescient::oracles
