#include "psmlab/balance.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace psmlab {

namespace {

void require_pairs(const MatchedSample& matched, int minimum, const char* who) {
  if (matched.n_pairs() < minimum) {
    throw TooFewPairs(std::string(who) + ": need at least " +
                      std::to_string(minimum) + " pairs, got " +
                      std::to_string(matched.n_pairs()));
  }
}

Vector group_values(const MatchedSample& matched, int column, bool treated) {
  Vector v(matched.n_pairs());
  for (int k = 0; k < matched.n_pairs(); ++k) {
    const int idx = treated ? matched.pairs[k].treated : matched.pairs[k].control;
    v(k) = matched.source->x(idx, column);
  }
  return v;
}

}  // namespace

double smd(const MatchedSample& matched, int column) {
  require_pairs(matched, 2, "smd");
  if (column < 0 || column >= matched.source->p()) {
    throw Error("smd: covariate column out of range");
  }
  const Vector t = group_values(matched, column, true);
  const Vector c = group_values(matched, column, false);
  const double gap = sample_mean(t) - sample_mean(c);
  const double pooled = (sample_variance(t) + sample_variance(c)) / 2.0;
  if (pooled > 0.0) return gap / std::sqrt(pooled);
  if (gap == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), gap);
}

double mahalanobis_means(const MatchedSample& matched, const SpdMatrix& sigma) {
  require_pairs(matched, 1, "mahalanobis_means");
  if (sigma.dim() != matched.source->p()) {
    throw Error("mahalanobis_means: sigma dimension mismatch");
  }
  Vector mean_t = Vector::Zero(sigma.dim());
  Vector mean_c = Vector::Zero(sigma.dim());
  for (const auto& pair : matched.pairs) {
    mean_t += matched.source->x.row(pair.treated).transpose();
    mean_c += matched.source->x.row(pair.control).transpose();
  }
  const double k = static_cast<double>(matched.n_pairs());
  const Vector gap = (mean_t - mean_c) / k;
  return std::sqrt(CholeskyFactor(sigma).quad_form_inv(gap));
}

double pairwise_imbalance(const MatchedSample& matched, const SpdMatrix& sigma) {
  require_pairs(matched, 1, "pairwise_imbalance");
  if (sigma.dim() != matched.source->p()) {
    throw Error("pairwise_imbalance: sigma dimension mismatch");
  }
  const CholeskyFactor chol(sigma);
  double sum = 0.0;
  for (const auto& pair : matched.pairs) {
    const Vector gap = (matched.source->x.row(pair.treated) -
                        matched.source->x.row(pair.control))
                           .transpose();
    sum += std::sqrt(chol.quad_form_inv(gap));
  }
  return sum / static_cast<double>(matched.n_pairs());
}

PropensityFit fit_matched_propensity(const MatchedSample& matched,
                                     const LogisticOptions& options) {
  require_pairs(matched, 1, "fit_matched_propensity");
  return fit_logistic(matched.covariates(), matched.treatment(), options);
}

BalanceReport balance_report(const MatchedSample& matched,
                             const SpdMatrix& original_sigma,
                             const PropensityFit& refit) {
  require_pairs(matched, 2, "balance_report");
  if (refit.ps.size() != 2 * matched.n_pairs()) {
    throw Error("balance_report: refit not aligned with matched sample");
  }
  BalanceReport report;
  report.n_pairs = matched.n_pairs();
  report.smd.resize(matched.source->p());
  for (int j = 0; j < matched.source->p(); ++j) report.smd(j) = smd(matched, j);
  report.mahalanobis_means = mahalanobis_means(matched, original_sigma);
  report.pairwise_ix = pairwise_imbalance(matched, original_sigma);
  report.c_stat = c_statistic(refit.ps, matched.treatment());
  return report;
}

}  // namespace psmlab
