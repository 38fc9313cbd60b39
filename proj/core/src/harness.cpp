#include "psmlab/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "psmlab/csv.hpp"

namespace psmlab {

namespace {

constexpr int kMaxDatagenAttempts = 64;

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

int tracked_smd_column(int p) { return p >= 3 ? 2 : 0; }

ResolvedCoefs resolve_scenario_coefficients(const ScenarioConfig& config) {
  ResolvedCoefs out;
  if (config.fixed_coefs) {
    out.beta2 = CoefVector::from_values(config.fixed_coefs->beta2);
    out.alpha1 = CoefVector::from_values(config.fixed_coefs->alpha1);
  } else {
    RandomStream rng = substream(config.seed, kCoefficientDomain, 0);
    auto [beta2, alpha1] = select_coefficient_pair(
        rng, config.p, config.k_beta, config.k_alpha, config.sine_interval.lo,
        config.sine_interval.hi);
    out.beta2 = std::move(beta2);
    out.alpha1 = std::move(alpha1);
  }
  // Undefined for a zero vector (the randomized-design control arm).
  if (out.beta2.values.norm() < 1e-12 || out.alpha1.values.norm() < 1e-12) {
    out.sine = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.sine = sine_distance(out.beta2.values, out.alpha1.values);
  }
  return out;
}

ReplicateRecord run_replicate(const ScenarioConfig& config, int replicate_index) {
  return run_replicate(config, resolve_scenario_coefficients(config),
                       replicate_index);
}

ReplicateRecord run_replicate(const ScenarioConfig& config,
                              const ResolvedCoefs& coefs, int replicate_index) {
  config.validate();
  const OutcomeModelSpec outcome = config.make_outcome(coefs.beta2);
  const std::size_t n_specs = config.model_specs.size();

  ReplicateRecord record;
  record.index = replicate_index;
  record.calipers.resize(config.caliper_multipliers.size());
  for (std::size_t c = 0; c < config.caliper_multipliers.size(); ++c) {
    record.calipers[c].multiplier = config.caliper_multipliers[c];
    record.calipers[c].estimates.resize(n_specs);
  }
  if (config.include_unmatched_arm) record.unmatched.resize(n_specs);

  // Degenerate draws are retried on the next attempt substream so that
  // replicate indexing stays stable.
  Dataset ds;
  bool have_data = false;
  for (int attempt = 0; attempt < kMaxDatagenAttempts; ++attempt) {
    RandomStream rng = substream(config.seed, static_cast<std::uint64_t>(attempt),
                                 static_cast<std::uint64_t>(replicate_index));
    try {
      ds = generate_dataset(rng, config.n, config.alpha0, coefs.alpha1, outcome);
      record.datagen_attempts = attempt + 1;
      have_data = true;
      break;
    } catch (const DegenerateTreatment&) {
      record.failure_kinds.emplace_back("DegenerateTreatmentRetry");
    }
  }
  if (!have_data) {
    record.failure_kinds.emplace_back("DegenerateTreatment");
    return record;
  }
  record.treated_fraction = ds.treated_fraction();

  PropensityFit fit;
  try {
    fit = fit_logistic(ds.x, ds.a);
  } catch (const Error& e) {
    record.failure_kinds.emplace_back(e.kind());
    return record;
  }
  record.ps_fit_ok = true;
  record.ps_converged = fit.converged;
  if (!fit.converged) record.failure_kinds.emplace_back("NotConverged");

  const SpdMatrix sigma = covariance_matrix(ds.x);
  const int smd_col = tracked_smd_column(config.p);

  for (std::size_t c = 0; c < config.caliper_multipliers.size(); ++c) {
    CaliperCell& cell = record.calipers[c];
    MatchedSample matched;
    try {
      matched = nearest_neighbor_match(
          ds, fit, make_caliper(cell.multiplier, fit.logit_ps));
    } catch (const NoPairsFormed& e) {
      record.failure_kinds.emplace_back(e.kind());
      continue;
    }
    cell.pair_count = matched.n_pairs();

    if (matched.n_pairs() >= 2) {
      const double d = smd(matched, smd_col);
      if (std::isfinite(d)) {
        cell.smd_x3 = d;
        cell.smd_valid = true;
      }
    }

    try {
      cell.mahalanobis_means = mahalanobis_means(matched, sigma);
      cell.pairwise_ix = pairwise_imbalance(matched, sigma);
      cell.mahalanobis_valid = true;
    } catch (const Error& e) {
      record.failure_kinds.emplace_back(e.kind());
    }

    try {
      const PropensityFit refit = fit_matched_propensity(matched);
      if (!refit.converged) record.failure_kinds.emplace_back("NotConverged");
      cell.c_stat = c_statistic(refit.ps, matched.treatment());
      cell.c_stat_valid = true;
    } catch (const Error& e) {
      record.failure_kinds.emplace_back(e.kind());
    }

    std::vector<EffectEstimate> fitted;
    fitted.reserve(n_specs);
    for (std::size_t s = 0; s < n_specs; ++s) {
      try {
        const EffectEstimate est =
            estimate_effect(matched, config.model_specs[s], config.sandwich_flavor);
        cell.estimates[s].valid = true;
        cell.estimates[s].beta1_hat = est.beta1_hat;
        cell.estimates[s].se_model = est.se_model;
        cell.estimates[s].se_sandwich = est.se_sandwich;
        fitted.push_back(est);
      } catch (const Error& e) {
        record.failure_kinds.emplace_back(e.kind());
      }
    }

    // The cherry-picking diagnostic only makes sense over the full model set.
    if (fitted.size() == n_specs && n_specs > 0) {
      const CherryPick pick = cherry_pick_max(fitted);
      cell.cherry_valid = true;
      cell.cherry_max = pick.max_estimate;
      cell.cherry_model_variance = pick.variance_across_models;
    }
  }

  if (config.include_unmatched_arm) {
    for (std::size_t s = 0; s < n_specs; ++s) {
      try {
        const EffectEstimate est = estimate_effect_unmatched(
            ds, config.model_specs[s], config.sandwich_flavor);
        record.unmatched[s].valid = true;
        record.unmatched[s].beta1_hat = est.beta1_hat;
        record.unmatched[s].se_model = est.se_model;
        record.unmatched[s].se_sandwich = est.se_sandwich;
      } catch (const Error& e) {
        record.failure_kinds.emplace_back(e.kind());
      }
    }
  }

  return record;
}

namespace {

EstimateAggregate aggregate_estimates(const std::string& name, double beta1_true,
                                      const std::vector<double>& estimates,
                                      const std::vector<double>& se_model,
                                      const std::vector<double>& se_sandwich) {
  EstimateAggregate agg;
  agg.model_spec = name;
  agg.n_used = static_cast<int>(estimates.size());
  if (estimates.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    agg.mean_estimate = agg.bias = agg.empirical_se = nan;
    agg.mean_se_model = agg.mean_se_sandwich = agg.mc_se_estimate = nan;
    return agg;
  }
  agg.mean_estimate = mean_of(estimates);
  agg.bias = agg.mean_estimate - beta1_true;
  agg.empirical_se = sd_of(estimates, agg.mean_estimate);
  agg.mean_se_model = mean_of(se_model);
  agg.mean_se_sandwich = mean_of(se_sandwich);
  agg.mc_se_estimate = agg.empirical_se / std::sqrt(agg.n_used);
  return agg;
}

}  // namespace

ScenarioSummary run_scenario(const ScenarioConfig& config, int workers,
                             const std::string& scenario_id) {
  config.validate();
  if (workers < 1) throw ConfigInvalid("run_scenario: workers must be >= 1");
  const ResolvedCoefs coefs = resolve_scenario_coefficients(config);
  const int n_replicates = config.replicates;

  std::vector<ReplicateRecord> records(n_replicates);
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_replicates) return;
      try {
        records[i] = run_replicate(config, coefs, i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int k = 0; k < workers; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Aggregate in replicate-index order: the result is identical for any
  // worker count.
  ScenarioSummary summary;
  summary.scenario_id = scenario_id;
  summary.replicates = n_replicates;
  summary.beta1_true = config.beta1;
  summary.alpha1_used = coefs.alpha1.values;
  summary.beta2_used = coefs.beta2.values;
  summary.sine_distance_used = coefs.sine;
  for (const auto& spec : config.model_specs) {
    summary.model_spec_names.push_back(spec.name());
  }

  for (const auto& record : records) {
    for (const auto& kind : record.failure_kinds) {
      ++summary.replicate_failures[kind];
    }
  }

  const std::size_t n_specs = config.model_specs.size();
  summary.calipers.resize(config.caliper_multipliers.size());
  for (std::size_t c = 0; c < config.caliper_multipliers.size(); ++c) {
    CaliperAggregate& agg = summary.calipers[c];
    agg.multiplier = config.caliper_multipliers[c];

    std::vector<double> pairs_all, smds, mahals, pairwise, cstats, cherry, cherry_var;
    pairs_all.reserve(records.size());
    for (const auto& record : records) {
      const CaliperCell& cell = record.calipers[c];
      pairs_all.push_back(static_cast<double>(cell.pair_count));
      if (cell.pair_count == 0) ++agg.zero_pair_replicates;
      if (cell.smd_valid) smds.push_back(cell.smd_x3);
      if (cell.mahalanobis_valid) {
        mahals.push_back(cell.mahalanobis_means);
        pairwise.push_back(cell.pairwise_ix);
      }
      if (cell.c_stat_valid) cstats.push_back(cell.c_stat);
      if (cell.cherry_valid) {
        cherry.push_back(cell.cherry_max);
        cherry_var.push_back(cell.cherry_model_variance);
      }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    agg.mean_pairs = pairs_all.empty() ? nan : mean_of(pairs_all);

    agg.n_smd_used = static_cast<int>(smds.size());
    if (!smds.empty()) {
      agg.mean_smd_x3 = mean_of(smds);
      agg.sd_smd_x3 = sd_of(smds, agg.mean_smd_x3);
      agg.mc_se_smd_x3 = agg.sd_smd_x3 / std::sqrt(agg.n_smd_used);
      int exceed = 0;
      for (const double d : smds) {
        if (std::fabs(d) > 0.1) ++exceed;
      }
      agg.prop_abs_smd_x3_gt_0_1 =
          static_cast<double>(exceed) / static_cast<double>(smds.size());
    } else {
      agg.mean_smd_x3 = agg.sd_smd_x3 = agg.mc_se_smd_x3 = nan;
      agg.prop_abs_smd_x3_gt_0_1 = nan;
    }

    agg.n_mahalanobis_used = static_cast<int>(mahals.size());
    if (!mahals.empty()) {
      agg.mean_mahalanobis_means = mean_of(mahals);
      agg.sd_mahalanobis_means = sd_of(mahals, agg.mean_mahalanobis_means);
      agg.mc_se_mahalanobis_means =
          agg.sd_mahalanobis_means / std::sqrt(agg.n_mahalanobis_used);
      agg.mean_pairwise_ix = mean_of(pairwise);
    } else {
      agg.mean_mahalanobis_means = agg.sd_mahalanobis_means = nan;
      agg.mc_se_mahalanobis_means = agg.mean_pairwise_ix = nan;
    }

    agg.n_c_stat_used = static_cast<int>(cstats.size());
    agg.mean_c_stat = cstats.empty() ? nan : mean_of(cstats);

    agg.n_cherry_used = static_cast<int>(cherry.size());
    if (!cherry.empty()) {
      agg.mean_cherry_max = mean_of(cherry);
      agg.mc_se_cherry_max =
          sd_of(cherry, agg.mean_cherry_max) / std::sqrt(agg.n_cherry_used);
      agg.mean_model_variance = mean_of(cherry_var);
    } else {
      agg.mean_cherry_max = agg.mc_se_cherry_max = agg.mean_model_variance = nan;
    }

    for (std::size_t s = 0; s < n_specs; ++s) {
      std::vector<double> estimates, se_model, se_sandwich;
      for (const auto& record : records) {
        const EstimateCell& cell = record.calipers[c].estimates[s];
        if (!cell.valid) continue;
        estimates.push_back(cell.beta1_hat);
        se_model.push_back(cell.se_model);
        se_sandwich.push_back(cell.se_sandwich);
      }
      agg.estimates.push_back(
          aggregate_estimates(config.model_specs[s].name(), config.beta1,
                              estimates, se_model, se_sandwich));
    }
  }

  if (config.include_unmatched_arm) {
    for (std::size_t s = 0; s < n_specs; ++s) {
      std::vector<double> estimates, se_model, se_sandwich;
      for (const auto& record : records) {
        if (record.unmatched.size() != n_specs) continue;
        const EstimateCell& cell = record.unmatched[s];
        if (!cell.valid) continue;
        estimates.push_back(cell.beta1_hat);
        se_model.push_back(cell.se_model);
        se_sandwich.push_back(cell.se_sandwich);
      }
      summary.unmatched.push_back(
          aggregate_estimates(config.model_specs[s].name(), config.beta1,
                              estimates, se_model, se_sandwich));
    }
  }

  return summary;
}

void export_results(const ScenarioSummary& summary, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("export_results: cannot create directory '" + out_dir +
                  "': " + ec.message());
  }

  {
    csv::Writer balance((fs::path(out_dir) / "balance.csv").string());
    balance.header(
        "scenario_id,caliper_multiplier,mean_pairs,mean_smd_x3,"
        "prop_abs_smd_x3_gt_0.1,mahalanobis_means,pairwise_ix,c_stat,"
        "mc_se_smd_x3");
    for (const auto& agg : summary.calipers) {
      balance.field(summary.scenario_id);
      balance.field(agg.multiplier);
      balance.field(agg.mean_pairs);
      balance.field(agg.mean_smd_x3);
      balance.field(agg.prop_abs_smd_x3_gt_0_1);
      balance.field(agg.mean_mahalanobis_means);
      balance.field(agg.mean_pairwise_ix);
      balance.field(agg.mean_c_stat);
      balance.field(agg.mc_se_smd_x3);
      balance.end_row();
    }
  }

  {
    csv::Writer estimates((fs::path(out_dir) / "estimates.csv").string());
    estimates.header(
        "scenario_id,caliper_multiplier,model_spec,mean_estimate,bias,"
        "empirical_se,mean_se_model,mean_se_sandwich,n_replicates_used");
    for (const auto& agg : summary.calipers) {
      for (const auto& est : agg.estimates) {
        estimates.field(summary.scenario_id);
        estimates.field(agg.multiplier);
        estimates.field(est.model_spec);
        estimates.field(est.mean_estimate);
        estimates.field(est.bias);
        estimates.field(est.empirical_se);
        estimates.field(est.mean_se_model);
        estimates.field(est.mean_se_sandwich);
        estimates.field(static_cast<long long>(est.n_used));
        estimates.end_row();
      }
    }
  }

  if (!summary.unmatched.empty()) {
    csv::Writer unmatched((fs::path(out_dir) / "unmatched.csv").string());
    unmatched.header(
        "scenario_id,model_spec,mean_estimate,bias,empirical_se,"
        "mean_se_model,mean_se_sandwich,n_replicates_used");
    for (const auto& est : summary.unmatched) {
      unmatched.field(summary.scenario_id);
      unmatched.field(est.model_spec);
      unmatched.field(est.mean_estimate);
      unmatched.field(est.bias);
      unmatched.field(est.empirical_se);
      unmatched.field(est.mean_se_model);
      unmatched.field(est.mean_se_sandwich);
      unmatched.field(static_cast<long long>(est.n_used));
      unmatched.end_row();
    }
  }
}

}  // namespace psmlab
