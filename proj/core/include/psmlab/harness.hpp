#pragma once

#include <map>
#include <string>
#include <vector>

#include "psmlab/balance.hpp"
#include "psmlab/config.hpp"

namespace psmlab {

// Raw per-replicate numbers. Cells are flagged invalid instead of aborting
// the replicate; the failure kind is appended to `failure_kinds`.
struct EstimateCell {
  bool valid = false;
  double beta1_hat = 0.0;
  double se_model = 0.0;
  double se_sandwich = 0.0;
};

struct CaliperCell {
  double multiplier = 0.0;
  int pair_count = 0;
  bool smd_valid = false;
  double smd_x3 = 0.0;
  bool mahalanobis_valid = false;
  double mahalanobis_means = 0.0;
  double pairwise_ix = 0.0;
  bool c_stat_valid = false;
  double c_stat = 0.0;
  std::vector<EstimateCell> estimates;  // parallel to config.model_specs
  bool cherry_valid = false;
  double cherry_max = 0.0;
  double cherry_model_variance = 0.0;
};

struct ReplicateRecord {
  int index = 0;
  int datagen_attempts = 1;
  double treated_fraction = 0.0;
  bool ps_fit_ok = false;
  bool ps_converged = false;
  std::vector<CaliperCell> calipers;
  std::vector<EstimateCell> unmatched;  // parallel to model_specs when enabled
  std::vector<std::string> failure_kinds;
};

// The (beta2, alpha1) pair a scenario runs with, either taken from
// fixed_coefs or selected by rejection from the coefficient substream
// (domain kCoefficientDomain, index 0).
struct ResolvedCoefs {
  CoefVector beta2;
  CoefVector alpha1;
  double sine = 0.0;
};

ResolvedCoefs resolve_scenario_coefficients(const ScenarioConfig& config);

// Aggregates over replicates. Means are taken over the valid cells only;
// n_used reports how many contributed. mc_se_* is the Monte Carlo standard
// error of the corresponding mean (SD / sqrt(n_used)).
struct EstimateAggregate {
  std::string model_spec;
  int n_used = 0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double empirical_se = 0.0;
  double mean_se_model = 0.0;
  double mean_se_sandwich = 0.0;
  double mc_se_estimate = 0.0;
};

struct CaliperAggregate {
  double multiplier = 0.0;
  double mean_pairs = 0.0;  // over all replicates, zero-pair included
  int zero_pair_replicates = 0;

  int n_smd_used = 0;
  double mean_smd_x3 = 0.0;
  double sd_smd_x3 = 0.0;
  double mc_se_smd_x3 = 0.0;
  double prop_abs_smd_x3_gt_0_1 = 0.0;

  int n_mahalanobis_used = 0;
  double mean_mahalanobis_means = 0.0;
  double sd_mahalanobis_means = 0.0;
  double mc_se_mahalanobis_means = 0.0;
  double mean_pairwise_ix = 0.0;

  int n_c_stat_used = 0;
  double mean_c_stat = 0.0;

  std::vector<EstimateAggregate> estimates;

  int n_cherry_used = 0;
  double mean_cherry_max = 0.0;
  double mc_se_cherry_max = 0.0;
  double mean_model_variance = 0.0;
};

struct ScenarioSummary {
  std::string scenario_id = "scenario";
  int replicates = 0;
  double beta1_true = 0.0;
  Vector alpha1_used;
  Vector beta2_used;
  double sine_distance_used = 0.0;
  std::vector<std::string> model_spec_names;
  std::vector<CaliperAggregate> calipers;
  std::vector<EstimateAggregate> unmatched;  // empty unless arm enabled
  std::map<std::string, int> replicate_failures;
};

// Runs one replicate: substream(seed, attempt, index) -> generate dataset ->
// fit PS -> per caliper: match, balance metrics, effect estimates (plus the
// unmatched arm when enabled). Deterministic: the same (config, index)
// produces a bit-identical record regardless of scheduling.
ReplicateRecord run_replicate(const ScenarioConfig& config, int replicate_index);

// Precomputed-coefficient overload used by run_scenario; equivalent to the
// two-argument form when `coefs` came from resolve_scenario_coefficients.
ReplicateRecord run_replicate(const ScenarioConfig& config,
                              const ResolvedCoefs& coefs, int replicate_index);

// Runs all replicates (in parallel when workers > 1) and aggregates in
// replicate-index order, so the summary is independent of the worker count.
ScenarioSummary run_scenario(const ScenarioConfig& config, int workers = 1,
                             const std::string& scenario_id = "scenario");

// Writes balance.csv and estimates.csv (plus unmatched.csv when the scenario
// carries an unmatched arm) under out_dir. Creates the directory if needed.
void export_results(const ScenarioSummary& summary, const std::string& out_dir);

// Covariate column tracked by the smd_x3 diagnostics (0-based): X3 when the
// scenario has at least 3 covariates, else X1.
int tracked_smd_column(int p);

}  // namespace psmlab
