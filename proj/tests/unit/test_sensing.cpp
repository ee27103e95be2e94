// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prescient/sensing.hpp"

using namespace prescient;
using network::NetworkConfig;
using sensing::IcrDetector;

namespace {

NetworkConfig sensing_cfg(int M_tilde, int r_I) {
  NetworkConfig cfg;
  cfg.t_u = 3;
  cfg.K_u = 3;
  cfg.r_u = 1;
  cfg.K = 1;
  cfg.r_I = r_I;
  cfg.M_tilde = M_tilde;
  cfg.finalize();
  return cfg;
}

}  // namespace

TEST_CASE("calibrate_threshold: closed form, round trip, oracle point") {
  // Single-sample detector: survival is e^{-x}, so P_f = e^{-1} puts the
  // threshold exactly at the noise variance.
  CHECK(sensing::calibrate_threshold(2.5, 1, 1, std::exp(-1.0)) ==
        doctest::Approx(2.5).epsilon(1e-12));

  for (double pf : {1e-4, 1e-3, 0.1}) {
    for (int m : {2, 8}) {
      IcrDetector d{1.3, sensing::calibrate_threshold(1.3, m, 2, pf)};
      CHECK(sensing::false_alarm_prob(d, 2 * m) == doctest::Approx(pf).epsilon(1e-9));
    }
  }
  // M_tilde * r_I = 8, P_f = 1e-3 against the series-inversion oracle
  // (frozen from the 50-digit bisection).
  const double x = sensing::calibrate_threshold(1.0, 4, 2, 1e-3);
  CHECK(x == doctest::Approx(19.626177395384238).epsilon(1e-10));
  CHECK(x == doctest::Approx(oracles::erlang_survival_inverse_bisect(8, 1e-3)).epsilon(1e-10));
}

TEST_CASE("sensing model calibration invariant") {
  NetworkConfig cfg = sensing_cfg(4, 2);
  cfg.K = 3;
  cfg.eps2 = {1.0, 2.0, 0.5};
  cfg.finalize();
  auto model = sensing::SensingModel::calibrate(cfg);
  for (int i = 0; i < cfg.K; ++i) {
    CHECK(model.icr[i].lambda > 0);
    CHECK(sensing::false_alarm_prob(model.icr[i], model.samples()) ==
          doctest::Approx(cfg.P_f).epsilon(1e-9));
  }
}

TEST_CASE("detection_prob_exact: degenerate points and Monte Carlo oracle") {
  NetworkConfig cfg = sensing_cfg(4, 1);  // m = 4
  auto model = sensing::SensingModel::calibrate(cfg);
  const auto& d = model.icr[0];
  // No signal: the test degenerates to its false-alarm rate.
  CHECK(sensing::detection_prob_exact(d, model.samples(), 0.0) ==
        doctest::Approx(cfg.P_f).epsilon(1e-9));
  // Vanishing threshold: always detects.
  IcrDetector open{1.0, 1e-14};
  CHECK(sensing::detection_prob_exact(open, 4, 2.0) == doctest::Approx(1.0).epsilon(1e-9));

  auto mc = oracles::detection_rate_mc(1.0, d.lambda, 4, 1, 10.0, 1000000, 1234);
  const double pd = sensing::detection_prob_exact(d, model.samples(), 10.0);
  CHECK(std::abs(pd - mc.mean) <= 3.0 * mc.std_error);

  // Monotone in the received signal energy.
  double prev = -1.0;
  for (double rho : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0}) {
    double v = sensing::detection_prob_exact(d, model.samples(), rho);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("detection_prob_clt tracks the exact value for large sample counts") {
  NetworkConfig cfg = sensing_cfg(64, 2);  // m = 128
  auto model = sensing::SensingModel::calibrate(cfg);
  const auto& d = model.icr[0];
  const int m = model.samples();
  // At the module's documented comparison point rho = eps2 * m.
  const double rho = static_cast<double>(m);
  CHECK(std::abs(sensing::detection_prob_clt(d, m, rho) -
                 sensing::detection_prob_exact(d, m, rho)) <= 0.01);
  // Through the detection transition.
  for (double r : {0.0, 32.0, 64.0, 256.0}) {
    CHECK(std::abs(sensing::detection_prob_clt(d, m, r) -
                   sensing::detection_prob_exact(d, m, r)) <= 0.01);
  }
  // Saturation.
  CHECK(sensing::detection_prob_clt(d, m, 1e6) == doctest::Approx(1.0).epsilon(1e-12));

  // Documented approximation gap: with a single sample the Gaussian form can
  // be off by far more than a percent.
  NetworkConfig tiny = sensing_cfg(1, 1);
  auto tiny_model = sensing::SensingModel::calibrate(tiny);
  const auto& td = tiny_model.icr[0];
  double gap = std::abs(sensing::detection_prob_clt(td, 1, 2.0) -
                        sensing::detection_prob_exact(td, 1, 2.0));
  CHECK(gap > 0.01);
}

TEST_CASE("detection_prob_avg: idle floor, trace monotonicity, rotation invariance") {
  NetworkConfig cfg = sensing_cfg(4, 2);
  cfg.P_t = 0.0;
  cfg.finalize();
  auto model = sensing::SensingModel::calibrate(cfg);
  Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(cfg.t_u, cfg.K_u);
  CHECK(sensing::detection_prob_avg(model, 0, zero, cfg) ==
        doctest::Approx(cfg.P_f).epsilon(1e-9));

  double prev = 0.0;
  for (double tr : {0.0, 0.5, 2.0, 10.0, 50.0}) {
    double sz2 = sensing::sigma_z2_statistical(cfg, 0, tr);
    double v = sensing::detection_prob_avg_sigma(model.icr[0], model.samples(), sz2);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }

  // Any rotation preserving the transmit power leaves the average unchanged.
  Rng rng(5);
  Eigen::MatrixXcd w(cfg.t_u, cfg.K_u);
  for (int i = 0; i < w.size(); ++i) w(i / cfg.K_u, i % cfg.K_u) = rng.cnormal(1.0);
  Eigen::MatrixXcd a(cfg.t_u, cfg.t_u);
  for (int i = 0; i < a.size(); ++i) a(i / cfg.t_u, i % cfg.t_u) = rng.cnormal(1.0);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  CHECK(sensing::detection_prob_avg(model, 0, w, cfg) ==
        doctest::Approx(sensing::detection_prob_avg(model, 0, (q * w).eval(), cfg))
            .epsilon(1e-12));
}

TEST_CASE("detection_prob_avg network-level Monte Carlo oracle") {
  NetworkConfig cfg;
  cfg.t_u = 3;
  cfg.K_u = 3;
  cfg.K = 1;
  cfg.r_I = 2;
  cfg.M_tilde = 4;
  cfg.sigma_f2 = {1.0};
  cfg.sigma_d2 = {1.0};
  cfg.finalize();  // P_t = 10, t_p = 4, eps2 = 1 defaults
  auto model = sensing::SensingModel::calibrate(cfg);
  const double trace = 10.0;
  const double sz2 = sensing::sigma_z2_statistical(cfg, 0, trace);
  CHECK(sz2 == doctest::Approx(2.0 * trace + 2.0 * 10.0 * 4.0 + 1.0));
  const double pd = sensing::detection_prob_avg_sigma(model.icr[0], model.samples(), sz2);
  auto mc = oracles::detection_avg_network_mc(cfg, trace, model.icr[0].lambda, 100000, 99);
  CHECK(std::abs(pd - mc.mean) <= 3.0 * std::max(mc.std_error, 1e-6));
}

TEST_CASE("simulate_sensing: silent band, loud band, false-alarm rate") {
  NetworkConfig cfg = sensing_cfg(4, 2);
  cfg.sigma_f2 = {0.0};
  cfg.sigma_d2 = {0.0};
  cfg.P_t = 0.0;
  cfg.finalize();
  auto model = sensing::SensingModel::calibrate(cfg);
  auto channels = network::draw_channels(cfg, 1);
  auto symbols = network::draw_symbols(cfg, cfg.M_tilde, 2);

  // Zero channels and a huge threshold: never declares occupancy.
  auto loud = model;
  loud.icr[0].lambda = 1e9;
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(cfg.t_u, cfg.K_u);
  auto out = sensing::simulate_sensing(loud, w, channels, symbols, cfg, 3);
  CHECK(out[0].decision == false);
  CHECK(out[0].missed == 1);

  // Strong signal, tiny noise, threshold below the signal energy.
  NetworkConfig strong = sensing_cfg(4, 2);
  strong.eps2 = {1e-12};
  strong.sigma_f2 = {1.0};
  strong.P_t = 0.0;
  strong.finalize();
  auto strong_model = sensing::SensingModel::calibrate(strong);
  strong_model.icr[0].lambda = 1.0;
  auto sch = network::draw_channels(strong, 4);
  auto sout = sensing::simulate_sensing(strong_model, (10.0 * w).eval(), sch,
                                        network::draw_symbols(strong, 4, 5), strong, 6);
  CHECK(sout[0].decision == true);
  CHECK(sout[0].rho > 0.0);

  // Idle-band alarm rate matches the calibrated target over 1e6 trials.
  long hits = 0;
  const long trials = 1000000;
  for (long t = 0; t < trials; ++t) {
    auto h0 = sensing::simulate_sensing(model, Eigen::MatrixXcd(), channels,
                                        Eigen::MatrixXcd(), cfg, 1000 + t);
    if (h0[0].decision) ++hits;
  }
  const double rate = static_cast<double>(hits) / trials;
  const double se = std::sqrt(cfg.P_f * (1 - cfg.P_f) / trials);
  CHECK(std::abs(rate - cfg.P_f) <= 3.0 * se);
}

TEST_CASE("expected_icr_interference arithmetic and Monte Carlo consistency") {
  NetworkConfig cfg = sensing_cfg(4, 2);
  cfg.K = 1;
  cfg.P_i = {100.0};
  cfg.sigma_v2 = {1.0};
  cfg.finalize();
  CHECK(sensing::expected_icr_interference(cfg, {1.0}) == doctest::Approx(0.0));
  CHECK(sensing::expected_icr_interference(cfg, {0.9}) == doctest::Approx(20.0));
  CHECK_THROWS_AS(sensing::expected_icr_interference(cfg, {1.2}), std::invalid_argument);

  NetworkConfig cfg3 = sensing_cfg(4, 2);
  cfg3.K = 3;
  cfg3.P_i = {100.0, 50.0, 10.0};
  cfg3.sigma_v2 = {1.0, 0.5, 2.0};
  cfg3.finalize();
  std::vector<double> pd = {0.7, 0.95, 0.5};
  std::vector<double> miss = {0.3, 0.05, 0.5};
  const double expected = sensing::expected_icr_interference(cfg3, pd);
  auto mc = oracles::realized_interference_mc(cfg3, miss, 1000000, 31);
  CHECK(std::abs(expected - mc.mean) / expected <= 0.01);
}
