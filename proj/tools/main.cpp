// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: run experiments (presets, spec files, or run
// manifests), validate spec files, and print oracle reference values.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "prescient/harness.hpp"

namespace {

using namespace prescient;

harness::ExperimentSpec resolve_spec(const std::string& target) {
  if (auto p = harness::make_preset(target)) return *p;
  std::ifstream in(target);
  if (!in) throw std::runtime_error("no such preset or file: " + target);
  char first = 0;
  in >> first;
  if (first == '{') return harness::load_manifest(target);
  return harness::load_spec_file(target);
}

int cmd_run(const std::string& target, int trials, std::uint64_t seed, bool seed_set,
            const std::string& out, const std::string& schemes, const std::string& sweep,
            const std::vector<std::string>& cfg_overrides, double eta_fraction,
            bool eta_set, int threads) {
  harness::ExperimentSpec spec = resolve_spec(target);
  if (trials > 0) spec.trials = trials;
  if (seed_set) spec.master_seed = seed;
  if (!out.empty()) spec.out_dir = out;
  if (threads >= 0) spec.threads = threads;
  if (eta_set) spec.eta_fraction = eta_fraction;
  if (!schemes.empty()) {
    spec.schemes.clear();
    std::stringstream ss(schemes);
    std::string item;
    while (std::getline(ss, item, ',')) spec.schemes.push_back(item);
  }
  if (!sweep.empty()) {
    auto eq = sweep.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--sweep: expected var=lo:step:hi");
    spec.sweep_var = sweep.substr(0, eq);
    spec.sweep_grid.clear();
    std::string vals = sweep.substr(eq + 1);
    auto c1 = vals.find(':');
    auto c2 = vals.rfind(':');
    if (c1 == std::string::npos || c2 == c1) {
      std::stringstream ss(vals);
      std::string item;
      while (std::getline(ss, item, ',')) spec.sweep_grid.push_back(std::stod(item));
    } else {
      double lo = std::stod(vals.substr(0, c1));
      double step = std::stod(vals.substr(c1 + 1, c2 - c1 - 1));
      double hi = std::stod(vals.substr(c2 + 1));
      for (double v = lo; v <= hi + 1e-12 * std::max(1.0, std::abs(hi)); v += step)
        spec.sweep_grid.push_back(v);
    }
  }
  for (const auto& ov : cfg_overrides) {
    auto eq = ov.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--cfg: expected key=value");
    network::apply_override(spec.cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  spec.cfg.finalize();
  spec.validate();

  auto result = harness::run_experiment(spec);
  auto files = harness::emit(result, spec.out_dir);
  for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
  for (const auto& point : result.points)
    for (const auto& agg : point.schemes)
      if (agg.n_failed > 0)
        std::printf("note: %s failed on %d/%d trials at sweep=%g\n", agg.scheme.c_str(),
                    agg.n_failed, agg.n_failed + agg.n_ok, point.sweep_value);
  return 0;
}

int cmd_validate(const std::string& path) {
  harness::ExperimentSpec spec = resolve_spec(path);
  std::printf("preset: %s\n", spec.preset.c_str());
  std::printf("trials: %d\n", spec.trials);
  std::printf("seed: %llu\n", static_cast<unsigned long long>(spec.master_seed));
  std::printf("sweep: %s over %zu points\n", spec.sweep_var.c_str(), spec.sweep_grid.size());
  std::printf("schemes:");
  for (const auto& s : spec.schemes) std::printf(" %s", s.c_str());
  std::printf("\nroc grid points: %zu\n", spec.roc_pfa_grid.size());
  std::printf("eta_fraction: %g\n", spec.eta_fraction);
  for (const auto& [k, v] : network::config_to_map(spec.cfg))
    std::printf("cfg.%s = %s\n", k.c_str(), v.c_str());
  std::printf("ok\n");
  return 0;
}

int cmd_oracle(const std::string& suite) {
  const bool all = suite == "all";
  if (all || suite == "mathcore") {
    std::printf("[mathcore] normal upper-tail inverse of 0.1 (bisection): %.10f\n",
                oracles::gaussian_q_inverse_bisect(0.1));
    std::printf("[mathcore] survival series m=8 x=16 (50-digit): %.15e\n",
                oracles::erlang_survival_highprec(8, 16.0));
    std::printf("[mathcore] survival inverse m=8 p=1e-3 (bisection): %.12f\n",
                oracles::erlang_survival_inverse_bisect(8, 1e-3));
    auto mc = oracles::marcum_mc(1, 2.0, 2.0, 10000000, 17);
    std::printf("[mathcore] noncentral energy tail order=1 a=2 b=2 (1e7 draws): %.6f +/- %.6f\n",
                mc.mean, mc.std_error);
  }
  if (all || suite == "sensing") {
    double x = oracles::erlang_survival_inverse_bisect(8, 1e-3);
    std::printf("[sensing] threshold/eps2 for M=4 r_I=2 P_f=1e-3: %.12f\n", x);
    auto det = oracles::detection_rate_mc(1.0, x, 4, 2, 10.0, 1000000, 23);
    std::printf("[sensing] detection rate rho=10 (1e6 trials): %.6f +/- %.6f\n", det.mean,
                det.std_error);
    network::NetworkConfig cfg;
    cfg.t_u = 3;
    cfg.K_u = 3;
    cfg.K = 1;
    cfg.finalize();
    auto avg = oracles::detection_avg_network_mc(cfg, 10.0, x, 100000, 29);
    std::printf("[sensing] network-averaged detection rate Tr=10 (1e5 trials): %.6f +/- %.6f\n",
                avg.mean, avg.std_error);
  }
  if (all || suite == "precoders") {
    auto wf = oracles::waterfilling({4.0, 1.0, 0.25}, 10.0);
    std::printf("[precoders] waterfilling gains {4,1,0.25} P=10: obj %.10f powers", wf.objective);
    for (double p : wf.power) std::printf(" %.6f", p);
    std::printf("\n");
    std::printf("[precoders] simplex linear max lam={3,2,1} P=5 (grid+refine): %.10f\n",
                oracles::simplex_linear_max_grid({3, 2, 1}, 5.0));
  }
  if (!all && suite != "mathcore" && suite != "sensing" && suite != "precoders") {
    std::fprintf(stderr, "unknown oracle suite: %s\n", suite.c_str());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underlay precoding simulator with spectrum-sensing interweave radios"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment preset, spec file, or manifest");
  std::string target, out, schemes, sweep;
  int trials = -1, threads = -1;
  std::uint64_t seed = 0;
  double eta_fraction = 0.1;
  std::vector<std::string> cfg_overrides;
  run->add_option("target", target, "Preset name, spec file, or manifest.json")->required();
  run->add_option("--trials", trials, "Trial count override");
  auto* seed_opt = run->add_option("--seed", seed, "Master seed override");
  run->add_option("--out", out, "Output directory");
  run->add_option("--schemes", schemes, "Comma-separated scheme list override");
  run->add_option("--sweep", sweep, "Sweep override, var=lo:step:hi or var=a,b,c");
  run->add_option("--cfg", cfg_overrides, "Scenario override key=value (repeatable)");
  auto* eta_opt = run->add_option("--eta-fraction", eta_fraction, "Leakage floor fraction");
  run->add_option("--threads", threads, "Worker threads (0 = hardware)");

  auto* validate = app.add_subcommand("validate", "Parse and echo a spec file");
  std::string vpath;
  validate->add_option("file", vpath, "Spec file or manifest")->required();

  auto* oracle = app.add_subcommand("oracle", "Print oracle reference values");
  std::string suite = "all";
  oracle->add_option("suite", suite, "mathcore | sensing | precoders | all");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed())
      return cmd_run(target, trials, seed, seed_opt->count() > 0, out, schemes, sweep,
                     cfg_overrides, eta_fraction, eta_opt->count() > 0, threads);
    if (validate->parsed()) return cmd_validate(vpath);
    if (oracle->parsed()) return cmd_oracle(suite);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
