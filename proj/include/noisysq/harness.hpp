#pragma once

// Experiment configs, dispatch, result emission, and the demonstration /
// verification suites.

#include <string>

#include "noisysq/reductions.hpp"
#include "noisysq/serialize.hpp"

namespace noisysq {

enum class ExperimentKind {
  Magnitude,
  VerifyIdentities,
  CsqReduction,
  SqReduction,
  RcnBaseline,
  BetaCleanDemo,
  RealizableTranslation,
  CalibrationSweep,
};

ExperimentKind experiment_from_name(const std::string& name);
std::string experiment_name(ExperimentKind kind);

enum class MagnitudeBoundPolicy { Explicit, Analytic, Estimate };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Magnitude;
  MarginalSpec marginal = UniformBall{2};
  Concept target = Halfspace{{1.0, 0.0}};
  NoiseSpec noise = Rcn{0.25};

  double eps = 0.1;
  double delta = 0.1;
  double C = 0.0;  // used when c_policy == Explicit
  MagnitudeBoundPolicy c_policy = MagnitudeBoundPolicy::Analytic;
  double kappa = 0.1;          // averaging-learner tolerance constant
  double sample_scale = 1.0;   // multiplies bound-derived draw counts

  uint64_t master_seed = 1;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  size_t eval_draws = 1'000'000;      // OPT / error evaluation
  size_t estimate_draws = 1'000'000;  // magnitude / bayes estimation
  size_t identity_draws = 10'000'000; // per identity-suite configuration
  size_t identity_configs = 20;
  double inject_eta_bias = 0.0;       // test-only fault injection

  // beta-clean demo
  double beta = 0.5;
  std::vector<double> rho_list = {0.1, 0.01, 0.001};

  // known-rate baseline
  double rcn_gamma = 0.4;
  double rcn_tau = 0.05;
  size_t rcn_trials = 200;

  // realizable translation
  std::string translation_model = "massart";  // or "tsybakov"
  double gamma = 0.25;
  double alpha = 0.5, A = 1.0, t0 = 0.5;
  double eps_prime = 0.1;

  // calibration sweep
  std::vector<double> kappa_list = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  std::vector<size_t> d_list = {1, 2, 5};
  size_t sweep_seeds = 10;
  size_t sweep_draw_cap = 20'000'000;  // executed-draw ceiling per query

  std::string output_path;  // directory for emitted files; empty = none
};

ExperimentConfig config_from_json(const json& j);
json to_json(const ExperimentConfig& config);

struct SeedResult {
  uint64_t seed = 0;
  double opt_hat = 0.0;
  double err_hat = 0.0;
  double excess = 0.0;
  double magnitude_hat = 0.0;
  uint64_t samples_total = 0;
  double wall_ms = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<SeedResult> per_seed;
  double success_fraction = 0.0;
  double mean_excess = 0.0;
  json details;

  json to_json(bool include_wall = true) const;
  std::string per_seed_csv() const;
};

// Dispatches on config.experiment; deterministic given the config.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes result.json, per_seed.csv and any candidate ledgers under
// config.output_path. No-op when the path is empty.
void write_outputs(const ExperimentResult& result,
                   const ExperimentConfig& config);

// Sub-reports (also reachable through run_experiment):
json verify_identities(const ExperimentConfig& config);
json beta_clean_demo(double beta, std::span<const double> rho_list, size_t n,
                     SeedSpec seed);
json calibration_sweep(const ExperimentConfig& config);

// Resolved magnitude bound for a config (per its c_policy).
double resolve_magnitude_bound(const ExperimentConfig& config);

}  // namespace noisysq
