#include "psmlab/datagen.hpp"

#include <cmath>
#include <string>

namespace psmlab {

namespace {
constexpr double kZeroNormTol = 1e-12;

void check_covariate_number(int covariate, const char* what) {
  if (covariate < 1) {
    throw Error(std::string(what) + ": covariate numbers are 1-based, got " +
                std::to_string(covariate));
  }
}
}  // namespace

CoefVector CoefVector::from_values(Vector v) {
  CoefVector c;
  c.scale = v.norm();
  c.values = std::move(v);
  return c;
}

void OutcomeModelSpec::validate() const {
  if (kind == OutcomeKind::kLinear &&
      (!quad_coefs.empty() || !interaction_coefs.empty())) {
    throw Error("OutcomeModelSpec: linear kind cannot carry quadratic or "
                "interaction terms");
  }
  if (!(noise_sd >= 0.0)) {
    throw Error("OutcomeModelSpec: noise_sd must be nonnegative");
  }
  for (const auto& q : quad_coefs) check_covariate_number(q.covariate, "quad term");
  for (const auto& t : interaction_coefs) {
    check_covariate_number(t.first, "interaction term");
    check_covariate_number(t.second, "interaction term");
  }
}

double OutcomeModelSpec::g(const Eigen::Ref<const Vector>& x) const {
  double value = beta2.values.dot(x);
  for (const auto& q : quad_coefs) {
    const double xj = x(q.covariate - 1);
    value += q.coef * xj * xj;
  }
  for (const auto& t : interaction_coefs) {
    value += t.coef * x(t.first - 1) * x(t.second - 1);
  }
  return value;
}

OutcomeModelSpec OutcomeModelSpec::linear(double beta0, double beta1,
                                          CoefVector beta2, double noise_sd) {
  OutcomeModelSpec spec;
  spec.kind = OutcomeKind::kLinear;
  spec.beta0 = beta0;
  spec.beta1 = beta1;
  spec.beta2 = std::move(beta2);
  spec.noise_sd = noise_sd;
  spec.validate();
  return spec;
}

OutcomeModelSpec OutcomeModelSpec::complex_default(double beta0, double beta1,
                                                   CoefVector beta2,
                                                   double noise_sd) {
  OutcomeModelSpec spec;
  spec.kind = OutcomeKind::kComplex;
  spec.beta0 = beta0;
  spec.beta1 = beta1;
  spec.beta2 = std::move(beta2);
  spec.quad_coefs = {{1, 0.5}, {2, 0.5}};
  spec.interaction_coefs = {{1, 2, 0.7}, {3, 4, 0.7}};
  spec.noise_sd = noise_sd;
  spec.validate();
  return spec;
}

CoefVector generate_coef_vector(RandomStream& rng, int dim, double scale) {
  if (dim < 1) throw Error("generate_coef_vector: dim must be >= 1");
  if (!(scale > 0.0)) throw Error("generate_coef_vector: scale must be > 0");
  Vector raw(dim);
  for (int i = 0; i < dim; ++i) {
    raw(i) = static_cast<double>(rng.next_int(1, 9));
  }
  raw /= raw.norm();  // entries are in {1..9}, so the norm is positive
  for (int i = 0; i < dim; ++i) {
    if (rng.next_bernoulli(0.5)) raw(i) = -raw(i);
  }
  CoefVector c;
  c.values = raw * scale;
  c.scale = scale;
  return c;
}

double sine_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw Error("sine_distance: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kZeroNormTol || nv < kZeroNormTol) {
    throw ZeroVector("sine_distance: vector norm below 1e-12");
  }
  const double cos_theta = u.dot(v) / (nu * nv);
  const double sin_sq = std::max(0.0, 1.0 - cos_theta * cos_theta);
  return std::min(1.0, std::sqrt(sin_sq));
}

std::pair<CoefVector, CoefVector> select_coefficient_pair(
    RandomStream& rng, int dim, double k_beta, double k_alpha, double lo,
    double hi, long max_attempts) {
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
    throw Error("select_coefficient_pair: interval must satisfy 0 <= lo < hi <= 1");
  }
  for (long attempt = 0; attempt < max_attempts; ++attempt) {
    CoefVector beta2 = generate_coef_vector(rng, dim, k_beta);
    CoefVector alpha1 = generate_coef_vector(rng, dim, k_alpha);
    const double d = sine_distance(beta2.values, alpha1.values);
    if (d > lo && d <= hi) return {std::move(beta2), std::move(alpha1)};
  }
  throw RejectionLimitExceeded(
      "select_coefficient_pair: no pair with sine distance in (" +
      std::to_string(lo) + ", " + std::to_string(hi) + "] after " +
      std::to_string(max_attempts) + " attempts");
}

Dataset generate_dataset(RandomStream& rng, int n, double alpha0,
                         const CoefVector& alpha1,
                         const OutcomeModelSpec& outcome) {
  if (n < 2) throw Error("generate_dataset: n must be >= 2");
  outcome.validate();
  const int p = alpha1.dim();
  if (outcome.beta2.dim() != p) {
    throw Error("generate_dataset: alpha1 and beta2 dimensions differ");
  }

  Dataset ds;
  ds.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) ds.x(i, j) = rng.next_normal();
  }

  ds.a.resize(n);
  for (int i = 0; i < n; ++i) {
    const double e = expit(alpha0 + alpha1.values.dot(ds.x.row(i)));
    ds.a(i) = rng.next_bernoulli(e) ? 1 : 0;
  }

  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double noise = rng.next_normal();  // consumed even when sd == 0
    ds.y(i) = outcome.beta0 + outcome.beta1 * ds.a(i) + outcome.g(ds.x.row(i)) +
              outcome.noise_sd * noise;
  }

  const int treated = ds.treated_count();
  if (treated == 0 || treated == n) {
    throw DegenerateTreatment("generate_dataset: all units in one arm (" +
                              std::to_string(treated) + " treated of " +
                              std::to_string(n) + ")");
  }

  ds.truth = GenerationTruth{outcome, alpha0, alpha1};
  return ds;
}

}  // namespace psmlab
