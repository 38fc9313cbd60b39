#include "psmlab/applied.hpp"

#include <cmath>
#include <filesystem>
#include <limits>

#include "psmlab/csv.hpp"

namespace psmlab {

AppliedMatchResult applied_match(const std::string& csv_path,
                                 const std::string& treatment_column,
                                 const std::vector<std::string>& covariate_columns,
                                 double caliper_multiplier,
                                 const std::string& out_dir) {
  if (covariate_columns.empty()) {
    throw ConfigInvalid("applied_match: at least one covariate column required");
  }
  if (!(caliper_multiplier >= 0.0)) {
    throw ConfigInvalid("applied_match: caliper multiplier must be nonnegative");
  }

  const csv::Table table = csv::read_table(csv_path);
  const int treatment_col = table.column(treatment_column);
  std::vector<int> covariate_cols;
  covariate_cols.reserve(covariate_columns.size());
  for (const auto& name : covariate_columns) covariate_cols.push_back(table.column(name));

  const int n = static_cast<int>(table.rows.size());
  const int p = static_cast<int>(covariate_cols.size());
  if (n < 2) throw InsufficientRows("applied_match: need at least 2 data rows");

  Dataset ds;
  ds.x.resize(n, p);
  ds.a.resize(n);
  ds.y = Vector::Zero(n);  // no outcome in applied mode
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string& treatment_value = row[treatment_col];
    if (treatment_value == "0") {
      ds.a(i) = 0;
    } else if (treatment_value == "1") {
      ds.a(i) = 1;
    } else {
      throw ParseError("applied_match: treatment column '" + treatment_column +
                       "' must be 0 or 1, got '" + treatment_value + "' on data row " +
                       std::to_string(i + 1));
    }
    for (int j = 0; j < p; ++j) {
      ds.x(i, j) = csv::parse_field_double(
          row[covariate_cols[j]],
          "applied_match: column '" + covariate_columns[j] + "', data row " +
              std::to_string(i + 1));
    }
  }

  const int treated = ds.treated_count();
  if (treated == 0 || treated == n) {
    throw OneClassOnly("applied_match: treatment column holds a single class");
  }

  const PropensityFit fit = fit_logistic(ds.x, ds.a);
  const Caliper caliper = make_caliper(caliper_multiplier, fit.logit_ps);
  const MatchedSample matched = nearest_neighbor_match(ds, fit, caliper);
  const SpdMatrix sigma = covariance_matrix(ds.x);

  AppliedMatchResult result;
  result.n_rows = n;
  result.n_treated = treated;
  result.caliper = caliper;
  result.pairs = matched.pairs;
  result.covariate_names = covariate_columns;
  result.report.n_pairs = matched.n_pairs();

  if (matched.n_pairs() >= 2) {
    result.report.smd.resize(p);
    for (int j = 0; j < p; ++j) result.report.smd(j) = smd(matched, j);
  } else {
    result.report.smd = Vector::Zero(p);
  }
  result.report.mahalanobis_means = mahalanobis_means(matched, sigma);
  result.report.pairwise_ix = pairwise_imbalance(matched, sigma);
  try {
    const PropensityFit refit = fit_matched_propensity(matched);
    result.report.c_stat = c_statistic(refit.ps, matched.treatment());
    result.c_stat_available = true;
  } catch (const Error&) {
    result.report.c_stat = std::numeric_limits<double>::quiet_NaN();
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("applied_match: cannot create directory '" + out_dir +
                  "': " + ec.message());
  }

  {
    csv::Writer out((fs::path(out_dir) / "matched.csv").string());
    std::string header = "pair_id";
    for (const auto& name : table.header) header += "," + name;
    out.header(header);
    for (int k = 0; k < matched.n_pairs(); ++k) {
      for (const int row_index : {matched.pairs[k].treated, matched.pairs[k].control}) {
        out.field(static_cast<long long>(k));
        for (const auto& value : table.rows[row_index]) out.field(value);
        out.end_row();
      }
    }
  }

  {
    csv::Writer out((fs::path(out_dir) / "balance_report.csv").string());
    out.header("metric,value");
    auto metric = [&out](const std::string& name, double value) {
      out.field(name);
      out.field(value);
      out.end_row();
    };
    metric("n_pairs", result.report.n_pairs);
    metric("caliper_multiplier", caliper.multiplier);
    metric("caliper_width", caliper.width);
    for (int j = 0; j < p; ++j) {
      metric("smd_" + covariate_columns[j], result.report.smd(j));
    }
    metric("mahalanobis_means", result.report.mahalanobis_means);
    metric("pairwise_ix", result.report.pairwise_ix);
    metric("c_stat", result.report.c_stat);
  }

  return result;
}

}  // namespace psmlab
