// psmlab command line: Monte Carlo caliper sweeps, matching on user data,
// and SVG rendering of result CSVs.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "psmlab/applied.hpp"
#include "psmlab/config.hpp"
#include "psmlab/figures.hpp"
#include "psmlab/harness.hpp"

namespace {

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<int> replicates, int workers,
                 std::optional<std::uint64_t> seed) {
  psmlab::ScenarioConfig config = psmlab::load_scenario_config(config_path);
  psmlab::apply_env_seed_override(config);
  if (seed) config.seed = *seed;
  if (replicates) config.replicates = *replicates;
  config.validate();

  const std::string scenario_id =
      std::filesystem::path(config_path).stem().string();
  std::cout << "scenario " << scenario_id << ": " << config.replicates
            << " replicates, n = " << config.n << ", seed = " << config.seed
            << ", workers = " << workers << "\n";

  const psmlab::ScenarioSummary summary =
      psmlab::run_scenario(config, workers, scenario_id);
  psmlab::export_results(summary, out_dir);

  std::cout << "coefficients: sine distance = " << summary.sine_distance_used
            << "\n";
  for (const auto& caliper : summary.calipers) {
    std::cout << "  caliper " << caliper.multiplier
              << ": mean pairs = " << caliper.mean_pairs
              << ", zero-pair replicates = " << caliper.zero_pair_replicates
              << "\n";
  }
  if (!summary.replicate_failures.empty()) {
    std::cout << "recorded failures:";
    for (const auto& [kind, count] : summary.replicate_failures) {
      std::cout << " " << kind << "=" << count;
    }
    std::cout << "\n";
  }
  std::cout << "wrote " << out_dir << "/balance.csv and estimates.csv";
  if (!summary.unmatched.empty()) std::cout << " and unmatched.csv";
  std::cout << "\n";
  return 0;
}

int run_match(const std::string& input, const std::string& treatment,
              const std::string& covariates_arg, double caliper,
              const std::string& out_dir) {
  std::vector<std::string> covariates;
  std::string token;
  for (const char c : covariates_arg + ",") {
    if (c == ',') {
      if (!token.empty()) covariates.push_back(token);
      token.clear();
    } else {
      token += c;
    }
  }

  const psmlab::AppliedMatchResult result =
      psmlab::applied_match(input, treatment, covariates, caliper, out_dir);
  std::cout << result.report.n_pairs << " pairs from " << result.n_treated
            << " treated / " << result.n_rows - result.n_treated
            << " control rows (caliper width " << result.caliper.width << ")\n";
  std::cout << "balance: mahalanobis_means = " << result.report.mahalanobis_means
            << ", pairwise_ix = " << result.report.pairwise_ix;
  if (result.c_stat_available) std::cout << ", c_stat = " << result.report.c_stat;
  std::cout << "\nwrote " << out_dir << "/matched.csv and balance_report.csv\n";
  return 0;
}

int run_figures(const std::string& results_dir, const std::string& out_dir) {
  const auto written = psmlab::render_figures(results_dir, out_dir);
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"propensity-score-matching laboratory"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo scenario");
  std::string sim_config;
  std::string sim_out;
  std::optional<int> sim_replicates;
  int sim_workers = default_workers();
  std::optional<std::uint64_t> sim_seed;
  simulate->add_option("--config", sim_config, "scenario config file")->required();
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--replicates", sim_replicates, "override replicate count");
  simulate->add_option("--workers", sim_workers, "parallel workers");
  simulate->add_option("--seed", sim_seed, "override seed (beats PSMLAB_SEED)");

  // match
  auto* match = app.add_subcommand("match", "match a CSV dataset");
  std::string match_input;
  std::string match_treatment;
  std::string match_covariates;
  double match_caliper = 0.2;
  std::string match_out;
  match->add_option("--input", match_input, "input CSV file")->required();
  match->add_option("--treatment", match_treatment, "treatment column (0/1)")
      ->required();
  match->add_option("--covariates", match_covariates,
                    "comma-separated covariate columns")
      ->required();
  match->add_option("--caliper", match_caliper,
                    "caliper multiplier (times SD of logit PS)");
  match->add_option("--out", match_out, "output directory")->required();

  // figures
  auto* figures = app.add_subcommand("figures", "render SVG charts from results");
  std::string fig_results;
  std::string fig_out;
  figures->add_option("--results", fig_results, "directory with result CSVs")
      ->required();
  figures->add_option("--out", fig_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      return run_simulate(sim_config, sim_out, sim_replicates, sim_workers,
                          sim_seed);
    }
    if (match->parsed()) {
      return run_match(match_input, match_treatment, match_covariates,
                       match_caliper, match_out);
    }
    if (figures->parsed()) {
      return run_figures(fig_results, fig_out);
    }
  } catch (const psmlab::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const psmlab::Error& e) {
    std::cerr << "error (" << e.kind() << "): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
