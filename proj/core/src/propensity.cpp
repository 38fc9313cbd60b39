#include "psmlab/propensity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace psmlab {

namespace {

// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

double bernoulli_loglik(const Vector& eta, const IntVector& a) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += a(i) * eta(i) - log1p_exp(eta(i));
  }
  return ll;
}

}  // namespace

PropensityFit fit_logistic(const Matrix& x, const IntVector& a,
                           const LogisticOptions& options) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  if (a.size() != n) throw Error("fit_logistic: x and a lengths differ");
  if (n <= p + 1) {
    throw InsufficientRows("fit_logistic: need n > p + 1, got n = " +
                           std::to_string(n) + ", p = " + std::to_string(p));
  }
  const int treated = a.sum();
  if (treated == 0 || treated == n) {
    throw OneClassOnly("fit_logistic: treatment vector has a single class");
  }

  // Constant columns are collinear with the intercept; drop them from the
  // working design and report a zero coefficient.
  std::vector<int> active;
  active.reserve(p);
  for (int j = 0; j < p; ++j) {
    if (x.col(j).minCoeff() != x.col(j).maxCoeff()) active.push_back(j);
  }
  const int q = static_cast<int>(active.size()) + 1;

  Matrix design(n, q);
  design.col(0).setOnes();
  for (int k = 0; k < q - 1; ++k) design.col(k + 1) = x.col(active[k]);

  const Vector a_dbl = a.cast<double>();
  Vector beta = Vector::Zero(q);
  Vector eta = Vector::Zero(n);
  Vector prob = Vector::Constant(n, 0.5);
  double ll = bernoulli_loglik(eta, a);

  bool converged = false;
  int iterations = 0;
  double gradient_norm = (design.transpose() * (a_dbl - prob)).cwiseAbs().maxCoeff();

  for (int it = 1; it <= options.max_iterations; ++it) {
    iterations = it;

    // Convergence check; catches divergence toward perfect separation first.
    if (eta.cwiseAbs().maxCoeff() > options.separation_limit) {
      throw SeparationDetected(
          "fit_logistic: |linear predictor| exceeded " +
          std::to_string(options.separation_limit) + " at iteration " +
          std::to_string(it));
    }
    if (gradient_norm <= options.tolerance) {
      converged = true;
      iterations = it - 1;
      break;
    }

    // Newton step: (X'WX)^-1 X'(a - p), W = diag(p(1-p)) floored away from 0.
    Vector w = (prob.array() * (1.0 - prob.array())).max(1e-10).matrix();
    Matrix gram = design.transpose() * w.asDiagonal() * design;
    Vector score = design.transpose() * (a_dbl - prob);
    Vector delta = solve_spd(SpdMatrix(std::move(gram)), score);

    // Step halving keeps the likelihood non-decreasing near separation. The
    // slack term admits full Newton steps whose improvement is below
    // floating-point resolution of the log-likelihood.
    const double slack = 1e-10 * (std::fabs(ll) + 1.0);
    double new_ll = 0.0;
    Vector candidate;
    Vector candidate_eta;
    int halvings = 0;
    for (;; ++halvings) {
      candidate = beta + delta;
      candidate_eta = design * candidate;
      new_ll = bernoulli_loglik(candidate_eta, a);
      if (new_ll >= ll - slack || halvings >= 30) break;
      delta /= 2.0;
    }

    beta = candidate;
    eta = candidate_eta;
    ll = new_ll;
    prob = eta.unaryExpr([](double e) { return expit(e); });
    gradient_norm = (design.transpose() * (a_dbl - prob)).cwiseAbs().maxCoeff();
  }

  if (!converged && gradient_norm <= options.tolerance) {
    // Tolerance reached exactly on the last update.
    if (eta.cwiseAbs().maxCoeff() > options.separation_limit) {
      throw SeparationDetected("fit_logistic: separation at final check");
    }
    converged = true;
  }

  PropensityFit fit;
  fit.intercept = beta(0);
  fit.coefs = Vector::Zero(p);
  for (int k = 0; k < q - 1; ++k) fit.coefs(active[k]) = beta(k + 1);
  fit.logit_ps = eta;
  fit.ps = eta.unaryExpr([](double e) { return expit(e); });
  fit.converged = converged;
  fit.iterations = iterations;
  fit.gradient_norm = gradient_norm;
  return fit;
}

double c_statistic(const Vector& scores, const IntVector& a) {
  const auto n = scores.size();
  if (a.size() != n) throw Error("c_statistic: scores and a lengths differ");
  const long n1 = a.sum();
  const long n0 = static_cast<long>(n) - n1;
  if (n1 == 0 || n0 == 0) {
    throw OneClassOnly("c_statistic: both classes required");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return scores(i) < scores(j);
  });

  // Midranks handle ties, matching the +0.5-per-tie pair convention.
  double treated_rank_sum = 0.0;
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) {
      if (a(order[k]) == 1) treated_rank_sum += midrank;
    }
    i = j + 1;
  }

  const double u = treated_rank_sum -
                   static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
  return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

}  // namespace psmlab
