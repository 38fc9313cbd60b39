// Shared construction helpers for the unit suites.
#pragma once

#include <vector>

#include "psmlab/datagen.hpp"
#include "psmlab/matching.hpp"
#include "psmlab/propensity.hpp"
#include "psmlab/random.hpp"

namespace psmlab::testing {

inline Dataset make_dataset(Matrix x, std::vector<int> a, Vector y = {}) {
  Dataset ds;
  ds.x = std::move(x);
  ds.a.resize(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) ds.a(static_cast<Eigen::Index>(i)) = a[i];
  ds.y = y.size() == ds.a.size() ? std::move(y) : Vector::Zero(ds.a.size());
  return ds;
}

// A fit whose logit PS is prescribed directly; ps is kept consistent.
inline PropensityFit make_fit(const Vector& logit_ps) {
  PropensityFit fit;
  fit.logit_ps = logit_ps;
  fit.ps = logit_ps.unaryExpr([](double e) { return expit(e); });
  fit.converged = true;
  return fit;
}

// Random matching instance: n units, covariate-free, treated with
// probability treat_prob, logit PS uniform on [-spread, spread].
inline Dataset random_match_instance(RandomStream& rng, int n, double treat_prob,
                                     double spread, Vector* logit_ps) {
  Matrix x = Matrix::Zero(n, 1);
  std::vector<int> a(static_cast<std::size_t>(n));
  logit_ps->resize(n);
  int treated = 0;
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = rng.next_bernoulli(treat_prob) ? 1 : 0;
    treated += a[static_cast<std::size_t>(i)];
    (*logit_ps)(i) = (rng.next_uniform() * 2.0 - 1.0) * spread;
    x(i, 0) = (*logit_ps)(i);
  }
  // force both classes
  if (treated == 0) a[0] = 1;
  if (treated == n) a[0] = 0;
  return make_dataset(std::move(x), std::move(a));
}

}  // namespace psmlab::testing
