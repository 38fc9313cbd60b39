#pragma once

#include <string>
#include <vector>

#include "psmlab/matching.hpp"

namespace psmlab {

enum class ModelLabel { kMA, kMAX45, kMFull, kCustom };

// Post-matching regression specification: the design is always
// [1, A, X_covariates], with `covariates` holding 1-based covariate numbers.
struct ModelSpec {
  ModelLabel label = ModelLabel::kMA;
  std::vector<int> covariates;

  std::string name() const;

  static ModelSpec ma();                       // treatment indicator only
  static ModelSpec max45();                    // A, X4, X5
  static ModelSpec mfull(int p = 5);           // A, X1..Xp
  static ModelSpec custom(std::vector<int> covariates);
};

struct OlsFit {
  Vector coefs;
  Matrix model_cov;  // s^2 (D'D)^-1, s^2 = RSS / (n - q)
  Vector residuals;
};

// Least squares via the normal equations; requires n > q and full column
// rank (RankDeficient otherwise).
OlsFit ols_fit(const Matrix& design, const Vector& y);

enum class SandwichFlavor { kHc0, kHc1 };

// Heteroskedasticity-robust covariance
//   factor * (D'D)^-1 D' diag(e^2) D (D'D)^-1,
// factor = n / (n - q) for HC1 and 1 for HC0.
Matrix sandwich_cov(const Matrix& design, const Vector& residuals,
                    SandwichFlavor flavor = SandwichFlavor::kHc1);

struct EffectEstimate {
  double beta1_hat = 0.0;
  double se_model = 0.0;
  double se_sandwich = 0.0;
  int n_used = 0;
  ModelSpec spec;
};

// Fits [1, A, X_spec] over the matched units; beta1_hat is the treatment
// coefficient. Requires 2 * n_pairs > q (TooFewPairs otherwise).
EffectEstimate estimate_effect(const MatchedSample& matched,
                               const ModelSpec& spec,
                               SandwichFlavor flavor = SandwichFlavor::kHc1);

// Same regression over a full (unmatched) dataset.
EffectEstimate estimate_effect_unmatched(const Dataset& ds,
                                         const ModelSpec& spec,
                                         SandwichFlavor flavor = SandwichFlavor::kHc1);

// Diagnostic cherry-picking estimator: the largest beta1_hat across fitted
// models, plus the sample variance of the estimates (the model-dependence
// metric). With a single estimate the variance is reported as 0 with
// variance_defined == false.
struct CherryPick {
  double max_estimate = 0.0;
  double variance_across_models = 0.0;
  bool variance_defined = false;
};

CherryPick cherry_pick_max(const std::vector<EffectEstimate>& estimates);

}  // namespace psmlab
