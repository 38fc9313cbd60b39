#pragma once

#include "psmlab/numerics.hpp"

namespace psmlab {

// Fitted logistic propensity model. ps holds e(x_i) = expit(eta_i) and
// logit_ps the linear predictor eta_i itself, so logit_ps == logit(ps) by
// construction. `converged` implies gradient_norm <= tolerance, where the
// gradient is the score X'(a - ps) in max-norm (intercept included).
struct PropensityFit {
  double intercept = 0.0;
  Vector coefs;     // one per covariate column; 0 for constant columns
  Vector ps;        // in (0, 1)
  Vector logit_ps;  // linear predictor
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
};

struct LogisticOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;        // max-norm of the score equations
  double separation_limit = 30.0; // |linear predictor| beyond this => separation
};

// Maximum-likelihood logistic regression of a on [1, x] via iteratively
// reweighted least squares with step halving when the log-likelihood
// decreases. Constant columns carry no information and are reported with a
// zero coefficient. Requires n > p + 1 and both classes present.
//
// Throws SeparationDetected when the linear predictor exceeds
// separation_limit in absolute value at a convergence check. A fit that
// exhausts max_iterations is returned with converged == false, not thrown.
PropensityFit fit_logistic(const Matrix& x, const IntVector& a,
                           const LogisticOptions& options = {});

// Mann-Whitney AUC of `scores` against the binary labels:
// P(score_treated > score_control) + 0.5 * P(tie), over all
// treated x control pairs. Computed via midranks in O(n log n).
double c_statistic(const Vector& scores, const IntVector& a);

}  // namespace psmlab
