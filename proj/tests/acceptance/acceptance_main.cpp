// Acceptance suite: end-to-end checks of the simulation laboratory against
// its pinned statistical behavior. Each criterion prints one PASS/FAIL line;
// the process exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "psmlab/applied.hpp"
#include "psmlab/harness.hpp"

using namespace psmlab;

namespace {

namespace fs = std::filesystem;

int g_failures = 0;

void report(int id, bool pass, const std::string& description,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id,
              description.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

int workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string fmt(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4g", v);
  return buffer;
}

const CaliperAggregate& at_multiplier(const ScenarioSummary& summary,
                                      double multiplier) {
  for (const auto& caliper : summary.calipers) {
    if (caliper.multiplier == multiplier) return caliper;
  }
  throw Error("acceptance: multiplier not found in summary");
}

const EstimateAggregate& spec_of(const CaliperAggregate& caliper,
                                 const std::string& name) {
  for (const auto& est : caliper.estimates) {
    if (est.model_spec == name) return est;
  }
  throw Error("acceptance: model spec not found: " + name);
}

ScenarioConfig linear_config(std::uint64_t seed, double lo, double hi) {
  ScenarioConfig config;
  config.seed = seed;
  config.replicates = 1000;
  config.n = 1500;
  config.p = 5;
  config.alpha0 = -0.9;
  config.k_alpha = 1.0;
  config.k_beta = 1.2;
  config.sine_interval = {lo, hi};
  config.beta1 = 0.5;
  config.outcome_kind = OutcomeKind::kLinear;
  config.caliper_multipliers = {20, 1, 0.2, 0.02, 0.002, 0.0002};
  config.model_specs = {ModelSpec::ma(), ModelSpec::max45(), ModelSpec::mfull(5)};
  return config;
}

ScenarioConfig complex_config(std::uint64_t seed) {
  ScenarioConfig config = linear_config(seed, 0.8, 1.0);
  config.beta1 = 1.0;
  config.outcome_kind = OutcomeKind::kComplex;  // default quad + interaction set
  config.model_specs = {ModelSpec::ma(), ModelSpec::mfull(5)};
  config.include_unmatched_arm = true;
  return config;
}

// ---- criterion 1 -----------------------------------------------------------

void criterion_treated_fraction() {
  const auto start = std::chrono::steady_clock::now();
  RandomStream coef_rng(424242);
  const CoefVector alpha1 = generate_coef_vector(coef_rng, 5, 1.0);
  const CoefVector beta2 = generate_coef_vector(coef_rng, 5, 1.2);
  const OutcomeModelSpec outcome = OutcomeModelSpec::linear(0.0, 0.5, beta2);

  double sum = 0.0;
  const int replicates = 200;
  for (int r = 0; r < replicates; ++r) {
    RandomStream rng = substream(20260801, 0, static_cast<std::uint64_t>(r));
    const Dataset ds = generate_dataset(rng, 1500, -0.9, alpha1, outcome);
    sum += ds.treated_fraction();
  }
  const double mean = sum / replicates;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  const bool pass = mean >= 0.27 && mean <= 0.33 && elapsed < 10.0;
  report(1, pass, "treated fraction in [0.27, 0.33] over 200 replicates",
         "mean = " + fmt(mean) + ", elapsed = " + fmt(elapsed) + " s");
}

// ---- criteria 2-4, 6, 9 (linear scenarios) ---------------------------------

void criterion_u_shape(const ScenarioSummary& summary, const std::string& regime,
                       bool& pass, std::string& detail) {
  const CaliperAggregate& wide = at_multiplier(summary, 20);
  const CaliperAggregate& optimal = at_multiplier(summary, 0.2);
  const CaliperAggregate& narrow = at_multiplier(summary, 0.002);
  const double margin_wide = wide.mean_mahalanobis_means -
                             optimal.mean_mahalanobis_means;
  const double margin_narrow = narrow.mean_mahalanobis_means -
                               optimal.mean_mahalanobis_means;
  const double se_wide = std::hypot(wide.mc_se_mahalanobis_means,
                                    optimal.mc_se_mahalanobis_means);
  const double se_narrow = std::hypot(narrow.mc_se_mahalanobis_means,
                                      optimal.mc_se_mahalanobis_means);
  const bool ok = margin_wide > 2.0 * se_wide && margin_narrow > 2.0 * se_narrow;
  pass = pass && ok;
  detail += regime + ": drop from 20 = " + fmt(margin_wide) + " (2se " +
            fmt(2.0 * se_wide) + "), rise to 0.002 = " + fmt(margin_narrow) +
            " (2se " + fmt(2.0 * se_narrow) + "); ";
}

void criterion_smd_flatness(const ScenarioSummary& summary,
                            const std::string& regime, bool& pass,
                            std::string& detail) {
  bool ok = true;
  for (const double m : {0.2, 0.02, 0.002}) {
    const double smd = at_multiplier(summary, m).mean_smd_x3;
    ok = ok && std::fabs(smd) < 0.02;
  }
  // proportion curve: interior minimum at or adjacent to 0.2
  std::size_t argmin = 0;
  for (std::size_t i = 1; i < summary.calipers.size(); ++i) {
    if (summary.calipers[i].prop_abs_smd_x3_gt_0_1 <
        summary.calipers[argmin].prop_abs_smd_x3_gt_0_1) {
      argmin = i;
    }
  }
  // schedule is {20, 1, 0.2, 0.02, 0.002, 0.0002}: 0.2 sits at index 2
  const bool location_ok = argmin >= 1 && argmin <= 3;
  const bool non_monotone =
      summary.calipers[argmin].prop_abs_smd_x3_gt_0_1 <
          summary.calipers.front().prop_abs_smd_x3_gt_0_1 &&
      summary.calipers[argmin].prop_abs_smd_x3_gt_0_1 <
          summary.calipers.back().prop_abs_smd_x3_gt_0_1;
  ok = ok && location_ok && non_monotone;
  pass = pass && ok;
  detail += regime + ": |smd| at 0.2/0.02/0.002 = " +
            fmt(std::fabs(at_multiplier(summary, 0.2).mean_smd_x3)) + "/" +
            fmt(std::fabs(at_multiplier(summary, 0.02).mean_smd_x3)) + "/" +
            fmt(std::fabs(at_multiplier(summary, 0.002).mean_smd_x3)) +
            ", prop argmin at multiplier " +
            fmt(summary.calipers[argmin].multiplier) + "; ";
}

void criterion_bias(const ScenarioSummary& summary, const std::string& regime,
                    bool& pass, std::string& detail) {
  bool ok = true;
  for (const std::string spec : {"MA", "MAX45"}) {
    const double bias_wide = spec_of(at_multiplier(summary, 20), spec).bias;
    const double bias_optimal = spec_of(at_multiplier(summary, 0.2), spec).bias;
    ok = ok && std::fabs(bias_wide) > 0.05 && std::fabs(bias_optimal) < 0.02;
    detail += regime + "/" + spec + ": bias(20) = " + fmt(bias_wide) +
              ", bias(0.2) = " + fmt(bias_optimal) + "; ";
  }
  for (const auto& caliper : summary.calipers) {
    const EstimateAggregate& mfull = spec_of(caliper, "MFull");
    ok = ok && std::fabs(mfull.bias) < 2.0 * mfull.mc_se_estimate;
  }
  pass = pass && ok;
}

void criterion_se_concordance(const ScenarioSummary& summary,
                              const std::string& regime, bool& pass,
                              std::string& detail) {
  bool ok = true;
  detail += regime + ":";
  for (const auto& caliper : summary.calipers) {
    if (caliper.multiplier > 0.2) continue;
    const EstimateAggregate& mfull = spec_of(caliper, "MFull");
    const double ratio =
        std::fabs(mfull.mean_se_model - mfull.empirical_se) / mfull.empirical_se;
    ok = ok && ratio <= 0.10;
    detail += " " + fmt(caliper.multiplier) + "->" + fmt(ratio);
  }
  detail += "; ";
  pass = pass && ok;
}

void criterion_cherry_pick(const ScenarioSummary& summary) {
  const CaliperAggregate& optimal = at_multiplier(summary, 0.2);
  const double excess = optimal.mean_cherry_max - summary.beta1_true;
  bool individual_ok = true;
  std::string detail = "cherry excess = " + fmt(excess) + " (2se " +
                       fmt(2.0 * optimal.mc_se_cherry_max) + ")";
  for (const auto& est : optimal.estimates) {
    const double spec_excess = est.mean_estimate - summary.beta1_true;
    individual_ok = individual_ok && spec_excess <= 2.0 * est.mc_se_estimate;
    detail += ", " + est.model_spec + " excess = " + fmt(spec_excess) + " (2se " +
              fmt(2.0 * est.mc_se_estimate) + ")";
  }
  const bool pass =
      excess > 2.0 * optimal.mc_se_cherry_max && individual_ok;
  report(9, pass, "cherry-picked maximum is biased while each spec is not", detail);
}

// ---- criterion 5 ------------------------------------------------------------

void criterion_model_dependence(const ScenarioSummary& summary) {
  const EstimateAggregate* unmatched = nullptr;
  for (const auto& est : summary.unmatched) {
    if (est.model_spec == "MFull") unmatched = &est;
  }
  const EstimateAggregate& wide = spec_of(at_multiplier(summary, 20), "MFull");
  const EstimateAggregate& optimal = spec_of(at_multiplier(summary, 0.2), "MFull");

  const double b_un = std::fabs(unmatched->bias);
  const double b_wide = std::fabs(wide.bias);
  const double b_opt = std::fabs(optimal.bias);
  const double gap1 = b_un - b_wide;
  const double gap2 = b_wide - b_opt;
  const double se1 = std::hypot(unmatched->mc_se_estimate, wide.mc_se_estimate);
  const double se2 = std::hypot(wide.mc_se_estimate, optimal.mc_se_estimate);
  const bool pass = gap1 > 2.0 * se1 && gap2 > 2.0 * se2;
  report(5, pass,
         "matching shrinks misspecification bias: |unmatched| > |caliper 20| > "
         "|caliper 0.2| for MFull",
         "|bias| = " + fmt(b_un) + " > " + fmt(b_wide) + " > " + fmt(b_opt) +
             ", gaps = " + fmt(gap1) + " (2se " + fmt(2.0 * se1) + "), " +
             fmt(gap2) + " (2se " + fmt(2.0 * se2) + ")");
}

// ---- criterion 7 ------------------------------------------------------------

void criterion_sampling_law() {
  bool pass = true;
  std::string detail;
  for (const int n : {50, 200, 800}) {
    const int replicates = 1000;
    std::vector<double> smds;
    smds.reserve(replicates);
    for (int r = 0; r < replicates; ++r) {
      RandomStream rng =
          substream(777000 + static_cast<std::uint64_t>(n), 0,
                    static_cast<std::uint64_t>(r));
      Dataset ds;
      ds.x.resize(2 * n, 1);
      ds.a.resize(2 * n);
      ds.y = Vector::Zero(2 * n);
      MatchedSample matched;
      matched.source = &ds;
      for (int i = 0; i < n; ++i) {
        ds.x(i, 0) = rng.next_normal();
        ds.x(n + i, 0) = rng.next_normal();
        ds.a(i) = 1;
        ds.a(n + i) = 0;
        matched.pairs.push_back({i, n + i});
      }
      smds.push_back(smd(matched, 0));
    }
    double mean = 0.0;
    for (const double d : smds) mean += d;
    mean /= replicates;
    double ss = 0.0;
    for (const double d : smds) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (replicates - 1));
    const double law = std::sqrt(2.0 / n);
    pass = pass && std::fabs(sd - law) < 0.15 * law;
    detail += "n=" + std::to_string(n) + ": sd = " + fmt(sd) + " vs " +
              fmt(law) + "; ";
  }
  report(7, pass, "SD of SMD follows sqrt(2/n) in a randomized design", detail);
}

// ---- criterion 8 ------------------------------------------------------------

void criterion_micro_oracles() {
  bool pass = true;
  std::string detail;

  // logistic MLE vs derivative-free optimizer on 20 small instances
  double worst_logistic = 0.0;
  RandomStream rng(8101);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30 + static_cast<int>(rng.next_int(0, 30));
    Matrix x(n, 2);
    IntVector a(n);
    int treated = 0;
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.next_normal();
      x(i, 1) = rng.next_normal();
      const double eta = -0.4 + 0.7 * x(i, 0) - 0.6 * x(i, 1);
      a(i) = rng.next_bernoulli(expit(eta)) ? 1 : 0;
      treated += a(i);
    }
    if (treated == 0) a(0) = 1;
    if (treated == n) a(0) = 0;
    PropensityFit fit;
    try {
      fit = fit_logistic(x, a);
    } catch (const SeparationDetected&) {
      continue;  // separated draws do not have a finite MLE to compare
    }
    Matrix design(n, 3);
    design.col(0).setOnes();
    design.col(1) = x.col(0);
    design.col(2) = x.col(1);
    const Vector oracle = oracles::nelder_mead_maximize(
        [&](const Vector& beta) {
          return oracles::logistic_loglik(design, a, beta);
        },
        Vector::Zero(3));
    worst_logistic = std::max(worst_logistic, std::fabs(oracle(0) - fit.intercept));
    worst_logistic = std::max(worst_logistic, std::fabs(oracle(1) - fit.coefs(0)));
    worst_logistic = std::max(worst_logistic, std::fabs(oracle(2) - fit.coefs(1)));
  }
  pass = pass && worst_logistic < 1e-5;
  detail += "logistic max gap = " + fmt(worst_logistic) + "; ";

  // OLS + HC1 vs direct formulas
  double worst_ols = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 15 + static_cast<int>(rng.next_int(0, 30));
    Matrix design(n, 3);
    design.col(0).setOnes();
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      design(i, 1) = rng.next_normal();
      design(i, 2) = rng.next_normal();
      y(i) = 1.0 + 0.5 * design(i, 1) + rng.next_normal();
    }
    const OlsFit fit = ols_fit(design, y);
    const Vector oracle_coefs = oracles::svd_least_squares(design, y);
    worst_ols =
        std::max(worst_ols, (fit.coefs - oracle_coefs).cwiseAbs().maxCoeff());
    const Matrix hc1 = sandwich_cov(design, fit.residuals, SandwichFlavor::kHc1);
    const Matrix oracle_hc1 = oracles::hc1_reference(design, fit.residuals);
    worst_ols = std::max(worst_ols, (hc1 - oracle_hc1).cwiseAbs().maxCoeff());
  }
  pass = pass && worst_ols < 1e-10;
  detail += "ols/hc1 max gap = " + fmt(worst_ols) + "; ";

  // greedy matching vs the exhaustive reference on small instances
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 3 + static_cast<int>(rng.next_int(0, 9));  // <= 12 units
    Vector lps(n);
    Dataset ds;
    ds.x = Matrix::Zero(n, 1);
    ds.a.resize(n);
    ds.y = Vector::Zero(n);
    int treated = 0;
    for (int i = 0; i < n; ++i) {
      lps(i) = (trial % 4 == 0) ? std::round(rng.next_normal() * 4.0) / 4.0
                                : rng.next_normal();
      ds.a(i) = rng.next_bernoulli(0.5) ? 1 : 0;
      treated += ds.a(i);
    }
    if (treated == 0) ds.a(0) = 1;
    if (treated == n) ds.a(0) = 0;
    PropensityFit fit;
    fit.logit_ps = lps;
    fit.ps = lps.unaryExpr([](double e) { return expit(e); });
    const double width = rng.next_uniform() * 2.0;
    std::vector<std::pair<int, int>> ours;
    try {
      const MatchedSample m =
          nearest_neighbor_match(ds, fit, Caliper{0.0, width});
      for (const auto& pair : m.pairs) ours.emplace_back(pair.treated, pair.control);
    } catch (const NoPairsFormed&) {
    }
    const auto reference = oracles::greedy_match_reference(lps, ds.a, width);
    if (ours != reference) ++mismatches;
  }
  pass = pass && mismatches == 0;
  detail += "matching mismatches = " + std::to_string(mismatches);

  report(8, pass, "micro-oracles: logistic 1e-5, OLS/HC1 1e-10, greedy exact",
         detail);
}

// ---- criterion 10 -----------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void criterion_determinism() {
  ScenarioConfig config = linear_config(20260810, 0.8, 1.0);
  config.replicates = 200;
  config.n = 800;

  const fs::path base = fs::temp_directory_path() / "psmlab_acceptance";
  fs::remove_all(base);
  const fs::path dir_a = base / "workers1";
  const fs::path dir_b = base / "workers4";
  export_results(run_scenario(config, 1, "determinism"), dir_a.string());
  export_results(run_scenario(config, 4, "determinism"), dir_b.string());

  const bool balance_equal =
      slurp(dir_a / "balance.csv") == slurp(dir_b / "balance.csv");
  const bool estimates_equal =
      slurp(dir_a / "estimates.csv") == slurp(dir_b / "estimates.csv");
  report(10, balance_equal && estimates_equal,
         "byte-identical CSVs across worker counts",
         std::string("balance ") + (balance_equal ? "==" : "!=") +
             ", estimates " + (estimates_equal ? "==" : "!="));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n_workers = workers();
  std::printf("running acceptance suite with %d workers\n", n_workers);

  criterion_treated_fraction();

  const ScenarioSummary high =
      run_scenario(linear_config(20260801, 0.8, 1.0), n_workers, "sine_high");
  const ScenarioSummary low =
      run_scenario(linear_config(20260802, 0.0, 0.2), n_workers, "sine_low");
  const ScenarioSummary complex_summary =
      run_scenario(complex_config(20260803), n_workers, "complex");

  {
    bool pass = true;
    std::string detail;
    criterion_u_shape(high, "sine>0.8", pass, detail);
    criterion_u_shape(low, "sine<=0.2", pass, detail);
    report(2, pass, "U-shaped mean Mahalanobis with minimum at caliper 0.2", detail);
  }
  {
    bool pass = true;
    std::string detail;
    criterion_smd_flatness(high, "sine>0.8", pass, detail);
    criterion_smd_flatness(low, "sine<=0.2", pass, detail);
    report(3, pass, "mean SMD flat near zero past the optimal caliper", detail);
  }
  {
    bool pass = true;
    std::string detail;
    criterion_bias(high, "sine>0.8", pass, detail);
    criterion_bias(low, "sine<=0.2", pass, detail);
    report(4, pass,
           "MA/MAX45 biased at caliper 20, unbiased at 0.2; MFull unbiased "
           "throughout",
           detail);
  }
  criterion_model_dependence(complex_summary);
  {
    bool pass = true;
    std::string detail;
    criterion_se_concordance(high, "sine>0.8", pass, detail);
    criterion_se_concordance(low, "sine<=0.2", pass, detail);
    criterion_se_concordance(complex_summary, "complex", pass, detail);
    report(6, pass, "model SE within 10% of empirical SE for MFull at <= 0.2",
           detail);
  }
  criterion_sampling_law();
  criterion_micro_oracles();
  criterion_cherry_pick(high);
  criterion_determinism();

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("acceptance suite finished in %.1f s with %d failure(s)\n", elapsed,
              g_failures);
  return g_failures;
}
