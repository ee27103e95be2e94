// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prescient/precoders.hpp"

namespace prescient::harness {

inline constexpr const char* kLibraryVersion = "prescient 0.1.0";

// One Monte Carlo experiment: a scenario, a scheme list, a sweep, and the
// seeding needed to reproduce it exactly.
struct ExperimentSpec {
  std::string preset = "custom";
  network::NetworkConfig cfg;
  std::vector<std::string> schemes;
  int trials = 1000;
  std::string sweep_var = "none";   // "none" | "P_dB" | "K" | "P_f"
  std::vector<double> sweep_grid = {0.0};
  std::vector<double> roc_pfa_grid;  // detector-threshold sweep within a trial
  double eta_fraction = 0.1;         // leakage floors eta_i = fraction * sigma_f2_i * P
  std::uint64_t master_seed = 1;
  std::string out_dir = "results";
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Named presets reproducing the library's four standard experiments.
ExperimentSpec preset_roc();
ExperimentSpec preset_sumrate_vs_power();
ExperimentSpec preset_pbd_vs_power();
ExperimentSpec preset_pbd_vs_K();
std::optional<ExperimentSpec> make_preset(const std::string& name);

// Key-value experiment description ("key = value", cfg.* for scenario keys).
ExperimentSpec load_spec_file(const std::string& path);
ExperimentSpec parse_spec(const std::string& text);

// Per-trial, per-scheme outcome kept for aggregation and analysis.
struct SchemeTrial {
  bool ok = false;
  std::string failure;
  std::string scheme;
  int iterations = 0;
  double objective = 0.0;
  bool rank_violation = false;
  double sum_rate_predicted = 0.0;
  double sum_rate_realized = 0.0;
  double pd_exact = 0.0;  // mean over ICRs, realized-block noncentrality
  double pd_avg = 0.0;    // mean over ICRs, averaged model
  double power_slack = 0.0;  // relative
  double pr_slack = 0.0;     // relative
  std::vector<double> roc_pd;  // per roc grid point
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::vector<SchemeTrial> schemes;
  std::vector<double> roc_fa;  // empirical idle-band alarm rate per grid point
};

struct MetricStat {
  double mean = 0.0;
  double ci_half = 0.0;  // 95% normal-approximation half width
  int n = 0;
};

struct SchemeAggregate {
  std::string scheme;
  int n_ok = 0;
  int n_failed = 0;
  std::map<std::string, MetricStat> metrics;
  std::vector<MetricStat> roc_pd;
};

struct SweepPointResult {
  double sweep_value = 0.0;
  std::vector<SchemeAggregate> schemes;
  std::vector<MetricStat> roc_fa;
  std::vector<TrialRecord> records;  // trial-ordered
};

struct AggregateResult {
  ExperimentSpec spec;
  std::vector<SweepPointResult> points;
};

// Runs every sweep point and trial; deterministic in the spec for any
// thread count (trials have independent counter-derived seeds and the
// reduction is ordered by trial index).
AggregateResult run_experiment(const ExperimentSpec& spec);

// Writes results.csv plus manifest.json under dir; returns the file paths.
std::vector<std::string> emit(const AggregateResult& result, const std::string& dir);

// Reconstructs the exact spec from a JSON run manifest.
ExperimentSpec load_manifest(const std::string& path);
std::string manifest_json(const AggregateResult& result);

// Fixed metric emission order.
const std::vector<std::string>& metric_names();

}  // namespace prescient::harness
