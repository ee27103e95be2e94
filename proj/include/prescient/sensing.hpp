// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "prescient/network.hpp"

namespace prescient::sensing {

using mathcore::ComplexMatrix;
using network::ChannelSet;
using network::CsiView;
using network::NetworkConfig;

// Energy-detector model of one interweave radio: noise floor, calibrated
// threshold, and the sample count of the binary occupancy test.
struct IcrDetector {
  double eps2 = 1.0;    // sensing noise variance
  double lambda = 0.0;  // detection threshold on the energy statistic
};

struct SensingModel {
  std::vector<IcrDetector> icr;
  int M_tilde = 0;
  int r_I = 0;
  double P_f = 0.0;

  int samples() const { return M_tilde * r_I; }  // complex samples per test
  static SensingModel calibrate(const NetworkConfig& cfg);
};

// Threshold achieving the target false-alarm rate: lambda = eps2 * x where
// the m-term survival series at x equals P_f (m = M_tilde * r_I).
double calibrate_threshold(double eps2, int M_tilde, int r_I, double P_f);

// False-alarm probability of a calibrated detector (noise-only input).
double false_alarm_prob(const IcrDetector& d, int samples);

// Detection probability for a known received mean sequence, parameterized by
// rho = eps^-2 * sum |mu|^2 over all spatio-temporal samples.
double detection_prob_exact(const IcrDetector& d, int samples, double rho);

// Gaussian (large-sample) approximation of the same quantity.
double detection_prob_clt(const IcrDetector& d, int samples, double rho);

// Average detection probability when every sample is modeled as zero-mean
// Gaussian with variance sigma_z2 (fading- and symbol-averaged model).
double detection_prob_avg_sigma(const IcrDetector& d, int samples, double sigma_z2);

// Sample variance of the averaged model for ICR i given the transmit
// covariance trace: 2*sigma_f2*tr + 2*P_t*t_p*sigma_d2 + eps2.
double sigma_z2_statistical(const NetworkConfig& cfg, int i, double trace_wwh);

// View-aware variant: uses the realized leakage quadratic form when the view
// exposes instantaneous UCT->ICR channels, the statistical one otherwise.
double sigma_z2_view(const CsiView& view, int i, const ComplexMatrix& w);

// Average detection probability of ICR i for a given precoder under the
// statistical model (trace-only dependence).
double detection_prob_avg(const SensingModel& model, int i, const ComplexMatrix& w,
                          const NetworkConfig& cfg);

// Outcome of one simulated sensing slot at one ICR under occupancy.
struct DetectionOutcome {
  double statistic = 0.0;       // received energy
  bool decision = false;        // occupancy declared
  int missed = 0;               // 1 when occupancy present but not declared
  double rho = 0.0;             // realized noncentrality of the slot
};

// Simulates the energy detector at every ICR for one transmitted block:
// builds the received samples from the realized UCT and PT signals plus
// noise, accumulates the energy statistic and thresholds it.
std::vector<DetectionOutcome> simulate_sensing(const SensingModel& model,
                                               const ComplexMatrix& w,
                                               const ChannelSet& channels,
                                               const ComplexMatrix& symbols,
                                               const NetworkConfig& cfg,
                                               std::uint64_t noise_seed);

// Expected aggregate interweave interference power at any underlay receiver
// given per-ICR detection probabilities.
double expected_icr_interference(const NetworkConfig& cfg,
                                 const std::vector<double>& detection_probs);

}  // namespace prescient::sensing
