// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations used to pin expected values in the
// test suites. Everything here deliberately avoids the library's own
// evaluation paths: high-precision series, bisection inversions, brute-force
// searches, and Monte Carlo sampling.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "prescient/network.hpp"

namespace prescient::oracles {

// Term-by-term survival series at 50-digit precision, rounded to double.
double erlang_survival_highprec(int m, double x);

// Root of the 50-digit survival series by plain bisection.
double erlang_survival_inverse_bisect(int m, double p);

// Inverse of the standard normal upper tail by bisection on erfc.
double gaussian_q_inverse_bisect(double p);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long trials = 0;
};

// P[sum of `order` draws of |CN(mu_i, 2)|^2-style energies > b^2] with
// noncentrality a^2 spread over the draws; the raw-sample Monte Carlo twin
// of the Poisson-mixture evaluation.
McEstimate marcum_mc(int order, double a, double b, long trials, std::uint64_t seed);

// Detection rate of an energy detector fed m = M_tilde * r_I complex samples
// with per-sample mean energies summing to rho * eps2 and noise CN(0, eps2).
McEstimate detection_rate_mc(double eps2, double lambda, int M_tilde, int r_I, double rho,
                             long trials, std::uint64_t seed);

// Detection rate when every sample is CN(0, sigma_z2) (averaged model).
McEstimate gaussian_energy_rate_mc(double sigma_z2, double lambda, int M_tilde, int r_I,
                                   long trials, std::uint64_t seed);

// Network-level averaged detection rate: fresh Rayleigh links, PSK blocks,
// and noise every trial, a fixed random precoder scaled to trace_wwh.
McEstimate detection_avg_network_mc(const network::NetworkConfig& cfg, double trace_wwh,
                                    double lambda, long trials, std::uint64_t seed);

// Sample mean of the realized aggregate interweave interference given a
// missed-detection probability per radio.
McEstimate realized_interference_mc(const network::NetworkConfig& cfg,
                                    const std::vector<double>& miss_prob, long trials,
                                    std::uint64_t seed);

// Classical waterfilling: maximize sum log2(1 + g2_m p_m), sum p_m <= P.
struct Waterfill {
  std::vector<double> power;
  double objective = 0.0;
};
Waterfill waterfilling(const std::vector<double>& gains2, double total_power);

// Central finite differences of a real function of a complex matrix in the
// conjugate-gradient convention (df = 2 Re <G, dW>).
Eigen::MatrixXcd finite_difference_gradient(
    const std::function<double(const Eigen::MatrixXcd&)>& f, const Eigen::MatrixXcd& w,
    double step);

// Argmax over a dense uniform grid on [0, 1].
double dense_grid_argmax(const std::function<double(double)>& f, int points);

// Maximum of sum_k lam_k p_k over the scaled simplex {p >= 0, sum p = P},
// located by coarse grid enumeration plus local refinement.
double simplex_linear_max_grid(const std::vector<double>& lam, double total_power);

}  // namespace prescient::oracles
