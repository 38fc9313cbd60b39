#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "psmlab/applied.hpp"
#include "psmlab/csv.hpp"
#include "psmlab/figures.hpp"
#include "psmlab/harness.hpp"

using namespace psmlab;

namespace {

namespace fs = std::filesystem;

ScenarioConfig small_config() {
  ScenarioConfig config;
  config.seed = 42;
  config.replicates = 30;
  config.n = 300;
  config.p = 5;
  config.alpha0 = -0.9;
  config.caliper_multipliers = {20, 1, 0.2, 0.02};
  config.model_specs = {ModelSpec::ma(), ModelSpec::mfull(5)};
  return config;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "psmlab_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool cells_equal(const CaliperCell& a, const CaliperCell& b) {
  if (a.pair_count != b.pair_count || a.smd_valid != b.smd_valid ||
      a.mahalanobis_valid != b.mahalanobis_valid ||
      a.c_stat_valid != b.c_stat_valid) {
    return false;
  }
  if (a.smd_valid && a.smd_x3 != b.smd_x3) return false;
  if (a.mahalanobis_valid && (a.mahalanobis_means != b.mahalanobis_means ||
                              a.pairwise_ix != b.pairwise_ix)) {
    return false;
  }
  if (a.c_stat_valid && a.c_stat != b.c_stat) return false;
  if (a.estimates.size() != b.estimates.size()) return false;
  for (std::size_t s = 0; s < a.estimates.size(); ++s) {
    if (a.estimates[s].valid != b.estimates[s].valid) return false;
    if (a.estimates[s].valid &&
        (a.estimates[s].beta1_hat != b.estimates[s].beta1_hat ||
         a.estimates[s].se_model != b.estimates[s].se_model ||
         a.estimates[s].se_sandwich != b.estimates[s].se_sandwich)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("run_replicate is bit-identical for a fixed (config, index)") {
  const ScenarioConfig config = small_config();
  const ReplicateRecord a = run_replicate(config, 7);
  const ReplicateRecord b = run_replicate(config, 7);
  CHECK(a.treated_fraction == b.treated_fraction);
  CHECK(a.datagen_attempts == b.datagen_attempts);
  REQUIRE(a.calipers.size() == b.calipers.size());
  for (std::size_t c = 0; c < a.calipers.size(); ++c) {
    CHECK(cells_equal(a.calipers[c], b.calipers[c]));
  }

  const ReplicateRecord other = run_replicate(config, 8);
  CHECK(a.treated_fraction != other.treated_fraction);
}

TEST_CASE("extreme calipers flag rather than abort, and pair counts are monotone") {
  ScenarioConfig config = small_config();
  config.n = 1500;
  config.caliper_multipliers = {20, 1, 0.2, 0.02, 0.002, 0.0002};
  const ReplicateRecord record = run_replicate(config, 0);
  REQUIRE(record.ps_fit_ok);
  for (std::size_t c = 1; c < record.calipers.size(); ++c) {
    CHECK(record.calipers[c].pair_count <= record.calipers[c - 1].pair_count);
  }
  // the largest caliper matches nearly every treated unit
  const int treated = static_cast<int>(
      std::lround(record.treated_fraction * config.n));
  CHECK(record.calipers[0].pair_count >= treated - 2);
}

TEST_CASE("randomized-design control arm has chance-level balance") {
  ScenarioConfig config = small_config();
  config.replicates = 80;
  config.n = 400;
  config.caliper_multipliers = {20, 0.2};
  FixedCoefs fixed;
  fixed.alpha1 = Vector::Zero(5);
  Vector beta2(5);
  beta2 << 1.2, 0, 0, 0, 0;
  fixed.beta2 = beta2;
  config.fixed_coefs = fixed;

  const ScenarioSummary summary = run_scenario(config, 2, "randomized");
  for (const auto& caliper : summary.calipers) {
    REQUIRE(caliper.n_smd_used > 50);
    CHECK(std::fabs(caliper.mean_smd_x3) < 4.0 * caliper.mc_se_smd_x3 + 1e-9);
    CHECK(caliper.mean_c_stat > 0.45);
    CHECK(caliper.mean_c_stat < 0.62);
  }
}

TEST_CASE("run_scenario is independent of the worker count") {
  const ScenarioConfig config = small_config();
  const ScenarioSummary one = run_scenario(config, 1, "w");
  const ScenarioSummary three = run_scenario(config, 3, "w");
  REQUIRE(one.calipers.size() == three.calipers.size());
  for (std::size_t c = 0; c < one.calipers.size(); ++c) {
    CHECK(one.calipers[c].mean_pairs == three.calipers[c].mean_pairs);
    CHECK(one.calipers[c].mean_smd_x3 == three.calipers[c].mean_smd_x3);
    CHECK(one.calipers[c].mean_mahalanobis_means ==
          three.calipers[c].mean_mahalanobis_means);
    CHECK(one.calipers[c].mean_c_stat == three.calipers[c].mean_c_stat);
    for (std::size_t s = 0; s < one.calipers[c].estimates.size(); ++s) {
      CHECK(one.calipers[c].estimates[s].mean_estimate ==
            three.calipers[c].estimates[s].mean_estimate);
      CHECK(one.calipers[c].estimates[s].empirical_se ==
            three.calipers[c].estimates[s].empirical_se);
    }
  }
  CHECK(one.replicate_failures == three.replicate_failures);
}

TEST_CASE("scenario coefficients honor the sine interval") {
  ScenarioConfig config = small_config();
  config.sine_interval = {0.8, 1.0};
  const ResolvedCoefs high = resolve_scenario_coefficients(config);
  CHECK(high.sine > 0.8);
  CHECK(high.sine <= 1.0);
  CHECK(std::fabs(high.beta2.values.norm() - config.k_beta) < 1e-12);
  CHECK(std::fabs(high.alpha1.values.norm() - config.k_alpha) < 1e-12);

  config.sine_interval = {0.0, 0.2};
  const ResolvedCoefs low = resolve_scenario_coefficients(config);
  CHECK(low.sine <= 0.2);
}

TEST_CASE("export_results: empty summary yields header-only CSVs") {
  const fs::path dir = fresh_dir("empty_export");
  ScenarioSummary summary;
  summary.scenario_id = "empty";
  export_results(summary, dir.string());
  CHECK(slurp(dir / "balance.csv") ==
        "scenario_id,caliper_multiplier,mean_pairs,mean_smd_x3,"
        "prop_abs_smd_x3_gt_0.1,mahalanobis_means,pairwise_ix,c_stat,"
        "mc_se_smd_x3\n");
  CHECK(slurp(dir / "estimates.csv") ==
        "scenario_id,caliper_multiplier,model_spec,mean_estimate,bias,"
        "empirical_se,mean_se_model,mean_se_sandwich,n_replicates_used\n");
  CHECK_FALSE(fs::exists(dir / "unmatched.csv"));
}

TEST_CASE("export_results: row counts follow the schedule") {
  ScenarioConfig config = small_config();
  config.replicates = 12;
  config.caliper_multipliers = {20, 1, 0.2, 0.02, 0.002, 0.0002};
  config.model_specs = {ModelSpec::ma(), ModelSpec::max45(), ModelSpec::mfull(5)};
  const ScenarioSummary summary = run_scenario(config, 2, "rows");
  const fs::path dir = fresh_dir("row_counts");
  export_results(summary, dir.string());

  const csv::Table balance = csv::read_table((dir / "balance.csv").string());
  const csv::Table estimates = csv::read_table((dir / "estimates.csv").string());
  CHECK(balance.rows.size() == 6);          // one per caliper
  CHECK(estimates.rows.size() == 18);       // 6 calipers x 3 specs
  CHECK(balance.header.size() == 9);
  CHECK(estimates.header.size() == 9);
}

TEST_CASE("export_results: unwritable path raises IoError") {
  ScenarioSummary summary;
  CHECK_THROWS_AS(export_results(summary, "/proc/psmlab_forbidden/out"), IoError);
}

TEST_CASE("unmatched arm appears when enabled") {
  ScenarioConfig config = small_config();
  config.replicates = 15;
  config.include_unmatched_arm = true;
  const ScenarioSummary summary = run_scenario(config, 2, "arm");
  REQUIRE(summary.unmatched.size() == config.model_specs.size());
  CHECK(summary.unmatched[0].n_used == 15);

  const fs::path dir = fresh_dir("arm_export");
  export_results(summary, dir.string());
  const csv::Table unmatched = csv::read_table((dir / "unmatched.csv").string());
  CHECK(unmatched.rows.size() == config.model_specs.size());
}

TEST_CASE("applied_match reproduces a hand-traced greedy result") {
  const fs::path dir = fresh_dir("applied");
  const fs::path input = dir / "input.csv";
  {
    std::ofstream out(input);
    // one covariate; logistic fit is monotone in x, so nearest-by-logit-PS
    // equals nearest-by-x
    out << "id,x,arm\n";
    out << "a,0.00,1\n";
    out << "b,0.30,1\n";
    out << "c,0.05,0\n";
    out << "d,0.26,0\n";
    out << "e,2.00,0\n";
    out << "f,-1.00,0\n";
  }
  const AppliedMatchResult result =
      applied_match(input.string(), "arm", {"x"}, 20.0, (dir / "out").string());
  REQUIRE(result.report.n_pairs == 2);
  // treated a (x=0) takes c (0.05); treated b (0.30) takes d (0.26)
  CHECK(result.pairs[0].treated == 0);
  CHECK(result.pairs[0].control == 2);
  CHECK(result.pairs[1].treated == 1);
  CHECK(result.pairs[1].control == 3);

  const csv::Table matched = csv::read_table((dir / "out" / "matched.csv").string());
  REQUIRE(matched.rows.size() == 4);
  CHECK(matched.header[0] == "pair_id");
  CHECK(matched.rows[0][1] == "a");
  CHECK(matched.rows[1][1] == "c");
  CHECK(fs::exists(dir / "out" / "balance_report.csv"));
}

TEST_CASE("applied_match rejects bad treatment values and one-class files") {
  const fs::path dir = fresh_dir("applied_bad");
  const fs::path non_binary = dir / "non_binary.csv";
  {
    std::ofstream out(non_binary);
    out << "x,arm\n1.0,1\n2.0,2\n3.0,0\n";
  }
  CHECK_THROWS_WITH_AS(
      applied_match(non_binary.string(), "arm", {"x"}, 1.0, (dir / "o1").string()),
      doctest::Contains("'2'"), ParseError);

  const fs::path all_treated = dir / "all_treated.csv";
  {
    std::ofstream out(all_treated);
    out << "x,arm\n1.0,1\n2.0,1\n3.0,1\n";
  }
  CHECK_THROWS_AS(
      applied_match(all_treated.string(), "arm", {"x"}, 1.0, (dir / "o2").string()),
      OneClassOnly);

  const fs::path missing_col = dir / "missing.csv";
  {
    std::ofstream out(missing_col);
    out << "x,arm\n1.0,1\n2.0,0\n";
  }
  CHECK_THROWS_AS(
      applied_match(missing_col.string(), "treat", {"x"}, 1.0, (dir / "o3").string()),
      ParseError);
}

TEST_CASE("figures render SVG charts from exported results") {
  ScenarioConfig config = small_config();
  config.replicates = 10;
  const ScenarioSummary summary = run_scenario(config, 2, "fig");
  const fs::path results = fresh_dir("fig_results");
  export_results(summary, results.string());

  const fs::path out = fresh_dir("fig_out");
  const auto written = render_figures(results.string(), out.string());
  CHECK(written.size() >= 7);
  for (const auto& path : written) {
    const std::string content = slurp(path);
    CHECK(content.rfind("<svg", 0) == 0);
    CHECK(content.find("</svg>") != std::string::npos);
  }
  CHECK(fs::exists(out / "fig_estimates.svg"));
  CHECK(fs::exists(out / "fig_se_MFull.svg"));
}

TEST_CASE("format_double round-trips cleanly") {
  CHECK(csv::format_double(0.2) == "0.2");
  CHECK(csv::format_double(20.0) == "20");
  CHECK(csv::format_double(0.0002) == "0.0002");
  const double pi_ish = 3.141592653589793;
  CHECK(std::stod(csv::format_double(pi_ish)) == pi_ish);
}

TEST_SUITE_END();
