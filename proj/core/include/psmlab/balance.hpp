#pragma once

#include "psmlab/matching.hpp"

namespace psmlab {

// Imbalance diagnostics of a matched sample. smd is signed and per covariate
// column; the two Mahalanobis metrics are nonnegative; c_stat comes from a
// logistic model refitted on the matched units.
struct BalanceReport {
  Vector smd;
  double mahalanobis_means = 0.0;
  double pairwise_ix = 0.0;
  double c_stat = 0.5;
  int n_pairs = 0;
};

// Standardized mean difference of covariate `column` (0-based) over the
// matched units: (mean_treated - mean_control) / sqrt((s2_t + s2_c) / 2).
// When both group variances vanish the result is 0 for equal means and
// signed infinity otherwise. Requires at least 2 pairs.
double smd(const MatchedSample& matched, int column);

// Mahalanobis distance between the matched-group covariate mean vectors;
// sigma is the covariance of the original pre-match data.
double mahalanobis_means(const MatchedSample& matched, const SpdMatrix& sigma);

// Mean over matched pairs of the Mahalanobis distance between the pair's
// covariate vectors. Zero iff every pair is covariate-identical.
double pairwise_imbalance(const MatchedSample& matched, const SpdMatrix& sigma);

// Refits the propensity model on the matched units only, with all covariate
// columns; used for the matched-sample C-statistic.
PropensityFit fit_matched_propensity(const MatchedSample& matched,
                                     const LogisticOptions& options = {});

// Assembles all diagnostics; `refit` must be a fit on the matched units (see
// fit_matched_propensity).
BalanceReport balance_report(const MatchedSample& matched,
                             const SpdMatrix& original_sigma,
                             const PropensityFit& refit);

}  // namespace psmlab
