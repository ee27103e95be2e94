// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "prescient/network.hpp"
#include "prescient/optim.hpp"
#include "prescient/sensing.hpp"

namespace prescient::precoders {

using mathcore::ComplexMatrix;
using network::ChannelSet;
using network::CsiView;
using network::NetworkConfig;
using sensing::SensingModel;

// Downlink beamforming matrix with per-user column blocks plus solver
// metadata. Every constructor-path enforces the power and PR-interference
// feasibility invariants up to the configured relative tolerance.
struct Precoder {
  ComplexMatrix W;                 // t_u x (sum of user block widths)
  std::vector<int> cols_per_user;  // block widths, one per UCR
  std::string scheme;
  int iterations = 0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double mix_alpha = std::numeric_limits<double>::quiet_NaN();
  double extracted_min_sinr = std::numeric_limits<double>::quiet_NaN();
  bool zero_leakage_warning = false;
  bool rank_violation = false;

  int col_offset(int k) const;
  ComplexMatrix block(int k) const;                 // W_k
  std::vector<ComplexMatrix> user_covariances() const;  // Q_k = W_k W_k^H
};

struct SinrReport {
  Eigen::VectorXd gamma;  // per-user SINR including expected ICR interference
  Eigen::VectorXd beta;   // partial SINR, ICR interference omitted
  Eigen::VectorXd rate;   // per-user rate, bits
  double sum_rate = 0.0;
};

// --- feasibility helpers -----------------------------------------------------
double transmit_power(const ComplexMatrix& w);
double pr_interference(const ComplexMatrix& w, const ComplexMatrix& n);
// Scale toward the feasible set; never scales up.
ComplexMatrix scale_into_feasible(const ComplexMatrix& w, const NetworkConfig& cfg,
                                  const ComplexMatrix& n);
// Scale (up or down) so the tighter of the two caps is met with equality.
ComplexMatrix scale_to_boundary(const ComplexMatrix& w, const NetworkConfig& cfg,
                                const ComplexMatrix& n);
void check_feasible(const ComplexMatrix& w, const NetworkConfig& cfg,
                    const ComplexMatrix& n, const char* who);

// --- transmit-side sum-rate objective ---------------------------------------
// Sum rate with the expected ICR interference folded into each user's noise
// floor; detection probabilities come from the view-aware averaged model.
double sum_rate_objective(const ComplexMatrix& w, const CsiView& view,
                          const SensingModel& model);
ComplexMatrix sum_rate_gradient(const ComplexMatrix& w, const CsiView& view,
                                const SensingModel& model);

// --- single-antenna-UCR schemes ----------------------------------------------

// Regularized channel inversion, scaled by the smaller of the two factors
// that meet the power and PR caps with equality.
Precoder rci(const CsiView& view, const NetworkConfig& cfg);

enum class McPowerSplit {
  EigenProportional,  // full column count, power proportional to eigenvalues
  Dominant,           // entire budget on the leading eigenvector
};

// Maximizes the interference-weighted signal power received by the ICRs
// subject to the power budget (top eigenvectors of the weighted leakage
// quadratic form).
Precoder multicast(const CsiView& view, const NetworkConfig& cfg,
                   McPowerSplit split = McPowerSplit::EigenProportional);

// Mixes the channel-inversion and multicast solutions; the mixing weight is
// chosen by a line search on the sum-rate objective.
Precoder linear_combination(const CsiView& view, const NetworkConfig& cfg,
                            const SensingModel& model,
                            const optim::SolverOptions& opts = {});

// Projected gradient ascent of the sum-rate objective from a feasible start.
Precoder prescient_gp(const CsiView& view, const NetworkConfig& cfg,
                      const SensingModel& model, const Precoder& init,
                      const optim::SolverOptions& opts = {});

// Best of one channel-inversion start plus `random_inits` random feasible
// starts; deterministic in `seed`.
Precoder prescient_gp_multistart(const CsiView& view, const NetworkConfig& cfg,
                                 const SensingModel& model, std::uint64_t seed,
                                 int random_inits = 4,
                                 const optim::SolverOptions& opts = {});

struct SdpResult {
  Precoder precoder;
  double t_star = 0.0;   // feasible end of the final bracket
  double t_lo = 0.0;
  double t_hi = 0.0;
  bool infeasible_at_zero = false;
  bool certificate_ok = false;  // t_lo feasible and t_hi infeasible
};

// Max-min partial-SINR design with leakage floors via the semidefinite
// relaxation: outer bisection on the SINR target, inner barrier feasibility
// solve, rank-1 extraction by the principal eigenpair.
SdpResult sdp_maxmin(const CsiView& view, const NetworkConfig& cfg,
                     const std::vector<double>& eta,
                     const optim::SolverOptions& opts = {});

// --- multi-antenna-UCR schemes -----------------------------------------------

// Joint covariance design under block-diagonalization: per-user covariances
// confined to the null space of the other users' channels, sum rate
// maximized under power / PR caps and leakage floors.
Precoder pbd_joint(const CsiView& view, const NetworkConfig& cfg,
                   const std::vector<double>& eta,
                   const optim::SolverOptions& opts = {});

// Two-step variant: null-space precoders with per-mode gains from the
// effective-channel SVD, then a concave power allocation under the same
// constraint set.
Precoder pbd_separate(const CsiView& view, const NetworkConfig& cfg,
                      const std::vector<double>& eta,
                      const optim::SolverOptions& opts = {});

// Separate pipeline with zero leakage floors (power and PR caps only).
Precoder conventional_bd(const CsiView& view, const NetworkConfig& cfg,
                         const optim::SolverOptions& opts = {});

// Default leakage floors: eta_i = c * sigma_f2_i * P.
std::vector<double> default_leakage_floors(const NetworkConfig& cfg, double fraction);

// --- evaluation ----------------------------------------------------------------

// Transmit-side prediction: expected ICR interference enters every user's
// noise floor through the view-aware averaged detection probabilities.
SinrReport predicted_sinr(const Precoder& p, const CsiView& view,
                          const SensingModel& model);

struct RealizedEvaluation {
  SinrReport report;
  std::vector<sensing::DetectionOutcome> outcomes;
  double realized_interference = 0.0;  // aggregate at the first UCR
};

// Ground-truth evaluation for one trial: sensing simulated with the given
// symbol block, missed detections turn into realized interference drawn
// from the ICR->UCR channel realizations.
RealizedEvaluation realized_sinr(const Precoder& p, const ChannelSet& channels,
                                 const NetworkConfig& cfg, const SensingModel& model,
                                 const ComplexMatrix& symbols, std::uint64_t seed);

enum class InterferenceMode { Predicted, Realized };

SinrReport evaluate_sinr(const Precoder& p, const ChannelSet& channels,
                         const CsiView& view, const NetworkConfig& cfg,
                         const SensingModel& model, InterferenceMode mode,
                         std::uint64_t seed = 0);

}  // namespace prescient::precoders
