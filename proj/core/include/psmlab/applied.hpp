#pragma once

#include <string>
#include <vector>

#include "psmlab/balance.hpp"

namespace psmlab {

struct AppliedMatchResult {
  int n_rows = 0;
  int n_treated = 0;
  Caliper caliper;
  std::vector<MatchedPair> pairs;  // row indices into the input CSV body
  BalanceReport report;
  bool c_stat_available = false;   // refit on the matched sample may fail
  std::vector<std::string> covariate_names;
};

// Propensity-score matching on user-supplied data: reads csv_path, fits the
// logistic propensity model on the named covariate columns, matches at
// caliper_multiplier times the SD of the logit PS, and writes
// matched.csv (pair_id + the original columns, treated row first) and
// balance_report.csv (metric,value) under out_dir.
//
// The treatment column must contain only 0 and 1 (ParseError otherwise, with
// the offending value in the message); a single-class file raises
// OneClassOnly; an empty match raises NoPairsFormed.
AppliedMatchResult applied_match(const std::string& csv_path,
                                 const std::string& treatment_column,
                                 const std::vector<std::string>& covariate_columns,
                                 double caliper_multiplier,
                                 const std::string& out_dir);

}  // namespace psmlab
