#include "psmlab/estimation.hpp"

#include <cmath>
#include <numeric>

namespace psmlab {

namespace {

Matrix build_effect_design(const Matrix& x, const IntVector& a,
                           const std::vector<int>& covariates) {
  const auto n = x.rows();
  Matrix design(n, 2 + static_cast<Eigen::Index>(covariates.size()));
  design.col(0).setOnes();
  design.col(1) = a.cast<double>();
  for (std::size_t k = 0; k < covariates.size(); ++k) {
    const int column = covariates[k] - 1;  // 1-based covariate numbers
    if (column < 0 || column >= x.cols()) {
      throw Error("estimate_effect: covariate number " +
                  std::to_string(covariates[k]) + " out of range");
    }
    design.col(2 + static_cast<Eigen::Index>(k)) = x.col(column);
  }
  return design;
}

EffectEstimate effect_from_design(const Matrix& design, const Vector& y,
                                  const ModelSpec& spec, SandwichFlavor flavor) {
  const OlsFit fit = ols_fit(design, y);
  const Matrix robust = sandwich_cov(design, fit.residuals, flavor);
  EffectEstimate est;
  est.beta1_hat = fit.coefs(1);
  est.se_model = std::sqrt(fit.model_cov(1, 1));
  est.se_sandwich = std::sqrt(robust(1, 1));
  est.n_used = static_cast<int>(design.rows());
  est.spec = spec;
  return est;
}

}  // namespace

std::string ModelSpec::name() const {
  switch (label) {
    case ModelLabel::kMA: return "MA";
    case ModelLabel::kMAX45: return "MAX45";
    case ModelLabel::kMFull: return "MFull";
    case ModelLabel::kCustom: {
      std::string s = "custom(";
      for (std::size_t i = 0; i < covariates.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(covariates[i]);
      }
      return s + ")";
    }
  }
  return "?";
}

ModelSpec ModelSpec::ma() { return {ModelLabel::kMA, {}}; }

ModelSpec ModelSpec::max45() { return {ModelLabel::kMAX45, {4, 5}}; }

ModelSpec ModelSpec::mfull(int p) {
  std::vector<int> all(static_cast<std::size_t>(p));
  std::iota(all.begin(), all.end(), 1);
  return {ModelLabel::kMFull, std::move(all)};
}

ModelSpec ModelSpec::custom(std::vector<int> covariates) {
  return {ModelLabel::kCustom, std::move(covariates)};
}

OlsFit ols_fit(const Matrix& design, const Vector& y) {
  const auto n = design.rows();
  const auto q = design.cols();
  if (y.size() != n) throw Error("ols_fit: design and y lengths differ");
  if (n <= q) {
    throw InsufficientRows("ols_fit: need n > q, got n = " + std::to_string(n) +
                           ", q = " + std::to_string(q));
  }
  Matrix gram = design.transpose() * design;
  OlsFit fit;
  try {
    const CholeskyFactor chol{SpdMatrix(std::move(gram))};
    fit.coefs = chol.solve(design.transpose() * y);
    fit.residuals = y - design * fit.coefs;
    const double s2 =
        fit.residuals.squaredNorm() / static_cast<double>(n - q);
    fit.model_cov = s2 * chol.inverse();
  } catch (const SingularMatrix& e) {
    throw RankDeficient(std::string("ols_fit: design not full column rank (") +
                        e.what() + ")");
  }
  return fit;
}

Matrix sandwich_cov(const Matrix& design, const Vector& residuals,
                    SandwichFlavor flavor) {
  const auto n = design.rows();
  const auto q = design.cols();
  if (residuals.size() != n) {
    throw Error("sandwich_cov: design and residuals lengths differ");
  }
  if (n <= q) {
    throw InsufficientRows("sandwich_cov: need n > q");
  }
  try {
    Matrix gram = design.transpose() * design;
    const CholeskyFactor chol{SpdMatrix(std::move(gram))};
    const Matrix bread = chol.inverse();
    const Matrix meat = design.transpose() *
                        residuals.array().square().matrix().asDiagonal() * design;
    const double factor =
        flavor == SandwichFlavor::kHc1
            ? static_cast<double>(n) / static_cast<double>(n - q)
            : 1.0;
    return factor * bread * meat * bread;
  } catch (const SingularMatrix& e) {
    throw RankDeficient(std::string("sandwich_cov: design not full column rank (") +
                        e.what() + ")");
  }
}

EffectEstimate estimate_effect(const MatchedSample& matched,
                               const ModelSpec& spec, SandwichFlavor flavor) {
  if (matched.n_pairs() == 0) throw TooFewPairs("estimate_effect: empty match");
  const auto q = 2 + static_cast<Eigen::Index>(spec.covariates.size());
  if (2 * matched.n_pairs() <= q) {
    throw TooFewPairs("estimate_effect: need 2 * n_pairs > " + std::to_string(q) +
                      ", got " + std::to_string(matched.n_pairs()) + " pairs");
  }
  const Matrix design =
      build_effect_design(matched.covariates(), matched.treatment(), spec.covariates);
  return effect_from_design(design, matched.outcomes(), spec, flavor);
}

EffectEstimate estimate_effect_unmatched(const Dataset& ds, const ModelSpec& spec,
                                         SandwichFlavor flavor) {
  const Matrix design = build_effect_design(ds.x, ds.a, spec.covariates);
  if (ds.n() <= design.cols()) {
    throw InsufficientRows("estimate_effect_unmatched: too few rows");
  }
  return effect_from_design(design, ds.y, spec, flavor);
}

CherryPick cherry_pick_max(const std::vector<EffectEstimate>& estimates) {
  if (estimates.empty()) throw Error("cherry_pick_max: empty estimate list");
  CherryPick pick;
  pick.max_estimate = estimates.front().beta1_hat;
  double sum = 0.0;
  for (const auto& est : estimates) {
    pick.max_estimate = std::max(pick.max_estimate, est.beta1_hat);
    sum += est.beta1_hat;
  }
  if (estimates.size() >= 2) {
    const double mean = sum / static_cast<double>(estimates.size());
    double ss = 0.0;
    for (const auto& est : estimates) {
      const double d = est.beta1_hat - mean;
      ss += d * d;
    }
    pick.variance_across_models = ss / static_cast<double>(estimates.size() - 1);
    pick.variance_defined = true;
  }
  return pick;
}

}  // namespace psmlab
