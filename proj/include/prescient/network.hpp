// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "prescient/mathcore.hpp"
#include "prescient/rng.hpp"

namespace prescient::network {

using mathcore::ComplexMatrix;

// Scenario description for one downlink cell: an underlay transmitter with
// t_u antennas serving K_u receivers, K spectrum-sensing interweave radios,
// and one (virtual) primary receiver protected by an interference cap.
//
// Powers and variances are linear; helpers accept dB where noted.
struct NetworkConfig {
  int t_u = 3;   // underlay transmitter antennas
  int K_u = 3;   // underlay receivers
  int r_u = 1;   // antennas per underlay receiver
  int K = 2;     // interweave radios
  int r_I = 2;   // antennas per interweave radio
  int t_p = 4;   // primary transmitter antennas
  int r_p = 4;   // primary receiver antennas (0 = no PR constraint)

  double P = 31.622776601683793;  // transmit power budget (15 dB default)
  double P_t = 10.0;              // primary transmitter power (total)
  double xi_p = 10.0;             // PR interference cap
  double P_f = 1e-3;              // sensing false-alarm target
  int M_tilde = 4;                // temporal sensing samples
  int psk_order = 4;              // constellation size

  std::vector<double> P_i;        // per-ICR transmit power (default 20 dB)
  std::vector<double> sigma_k2;   // per-UCR noise variance
  std::vector<double> eps2;       // per-ICR sensing noise variance
  std::vector<double> sigma_f2;   // UCT->ICR link variance
  std::vector<double> sigma_d2;   // PT->ICR link variance
  std::vector<double> sigma_v2;   // ICR->UCR link variance
  double sigma_h2 = 1.0;          // UCT->UCR link variance
  double sigma_n2 = 1.0;          // UCT->PR link variance

  // Broadcasts scalar per-node fields to their full length and validates
  // every invariant; throws std::invalid_argument on violation.
  void finalize();

  double pi(int i) const { return P_i.at(i); }
  int sensing_samples() const { return M_tilde * r_I; }

  static double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
};

// Parses "key = value" text (one per line, '#' comments, lists as
// comma-separated values); unknown keys are rejected.
NetworkConfig parse_config(const std::string& text);
NetworkConfig load_config_file(const std::string& path);
void apply_override(NetworkConfig& cfg, const std::string& key, const std::string& value);
std::map<std::string, std::string> config_to_map(const NetworkConfig& cfg);

// One realization of every link in the network. Immutable after creation.
struct ChannelSet {
  std::vector<ComplexMatrix> H;     // UCT->UCR k, r_u x t_u
  ComplexMatrix H_u;                // stacked UCR channels, (K_u*r_u) x t_u
  std::vector<ComplexMatrix> F;     // UCT->ICR i, r_I x t_u
  ComplexMatrix N;                  // UCT->PR, r_p x t_u
  std::vector<ComplexMatrix> D;     // PT->ICR i, r_I x t_p
  std::vector<std::vector<ComplexMatrix>> V;  // ICR i -> UCR k, r_u x r_I
};

// Draws every link i.i.d. CN(0, sigma^2) with the total-variance convention
// (real and imaginary parts each sigma^2/2). Deterministic in (cfg, seed).
ChannelSet draw_channels(const NetworkConfig& cfg, std::uint64_t seed);

// Unit-modulus M-ary PSK block, K_u streams by n symbols, uniform over the
// constellation. Deterministic in (cfg, n, seed).
ComplexMatrix draw_symbols(const NetworkConfig& cfg, int n, std::uint64_t seed);

// Same source with an explicit stream count (spatial-multiplexing blocks).
ComplexMatrix draw_symbol_streams(const NetworkConfig& cfg, int streams, int n,
                                  std::uint64_t seed);

// PSK block with arbitrary stream count and per-entry power scale.
ComplexMatrix draw_psk_block(int streams, int n, int order, double entry_power, Rng& rng);

enum class CsiMode {
  Full,                  // all instantaneous links
  PartialInstantaneousF, // downlink + PR + UCT->ICR realizations
  StatisticalF,          // downlink + PR realizations; ICR links by statistics only
};

// What a precoder is allowed to see. Downlink and PR channels are always
// exposed; the UCT->ICR realizations only outside statistical mode.
class CsiView {
 public:
  CsiView(const ChannelSet& channels, const NetworkConfig& cfg, CsiMode mode)
      : channels_(&channels), cfg_(&cfg), mode_(mode) {}

  CsiMode mode() const { return mode_; }
  const NetworkConfig& cfg() const { return *cfg_; }
  const ComplexMatrix& H_u() const { return channels_->H_u; }
  const ComplexMatrix& H(int k) const { return channels_->H.at(k); }
  const ComplexMatrix& N() const { return channels_->N; }
  bool has_instantaneous_F() const { return mode_ != CsiMode::StatisticalF; }
  const ComplexMatrix& F(int i) const;
  double sigma_f2(int i) const { return cfg_->sigma_f2.at(i); }

  // Quadratic form A_i with <A_i, WW^H> equal to the ICR-side received
  // signal variance contribution of the transmit signal: the realized
  // per-antenna average when F_i is visible, its fading average otherwise.
  ComplexMatrix leakage_form(int i) const;

 private:
  const ChannelSet* channels_;
  const NetworkConfig* cfg_;
  CsiMode mode_;
};

}  // namespace prescient::network
