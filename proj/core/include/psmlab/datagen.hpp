#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "psmlab/numerics.hpp"
#include "psmlab/random.hpp"

namespace psmlab {

// Coefficient vector with a pinned Euclidean norm: the stored values satisfy
// |values| == scale to within 1e-12 (unit direction times scale).
struct CoefVector {
  Vector values;
  double scale = 1.0;

  int dim() const { return static_cast<int>(values.size()); }

  // Wraps an explicit vector; scale is taken as its norm.
  static CoefVector from_values(Vector v);
};

// One quadratic term c * X_j^2; `covariate` is the 1-based covariate number
// (X1..Xp), matching the naming used in model specifications and configs.
struct QuadTerm {
  int covariate = 0;
  double coef = 0.0;
};

// One interaction term c * X_i * X_j, 1-based covariate numbers.
struct InteractionTerm {
  int first = 0;
  int second = 0;
  double coef = 0.0;
};

enum class OutcomeKind { kLinear, kComplex };

// Outcome generator: Y = beta0 + beta1 * A + g(X) + noise_sd * eps with
// eps ~ N(0, 1). Linear g(X) = beta2'X; the complex kind adds quadratic and
// interaction terms on top of the linear part.
struct OutcomeModelSpec {
  OutcomeKind kind = OutcomeKind::kLinear;
  double beta0 = 0.0;
  double beta1 = 0.5;
  CoefVector beta2;
  std::vector<QuadTerm> quad_coefs;
  std::vector<InteractionTerm> interaction_coefs;
  double noise_sd = 1.0;

  // Linear kind must carry no quadratic or interaction terms; noise_sd >= 0
  // (zero is allowed for noiseless test designs).
  void validate() const;

  double g(const Eigen::Ref<const Vector>& x) const;

  static OutcomeModelSpec linear(double beta0, double beta1, CoefVector beta2,
                                 double noise_sd = 1.0);
  // Default complex model: linear part plus
  //   0.5*X1^2 + 0.5*X2^2 + 0.7*X1*X2 + 0.7*X3*X4,
  // all coefficients overridable through the scenario config.
  static OutcomeModelSpec complex_default(double beta0, double beta1,
                                          CoefVector beta2,
                                          double noise_sd = 1.0);
};

struct GenerationTruth {
  OutcomeModelSpec outcome;
  double alpha0 = 0.0;
  CoefVector alpha1;
};

// A generated (or externally loaded) sample: covariates, binary treatment,
// continuous outcome. `truth` is present only for simulated data.
struct Dataset {
  Matrix x;     // n x p, standard-normal scale for generated data
  IntVector a;  // n, values in {0, 1}
  Vector y;     // n
  std::optional<GenerationTruth> truth;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }

  int treated_count() const { return a.sum(); }
  double treated_fraction() const {
    return static_cast<double>(treated_count()) / static_cast<double>(a.size());
  }
};

// Draws `dim` values uniformly from the integers {1..9}, normalizes the
// vector to unit norm, flips each element's sign independently with
// probability 1/2, then multiplies by `scale`. Draw order is fixed: all
// integer draws first, then all sign flips.
CoefVector generate_coef_vector(RandomStream& rng, int dim, double scale);

// Sine of the angle between u and v: sqrt(1 - cos^2 theta), in [0, 1].
// 0 means parallel directions, 1 orthogonal. Throws ZeroVector when either
// norm is below 1e-12.
double sine_distance(const Vector& u, const Vector& v);

// Repeatedly draws (beta2, alpha1) pairs (beta2 first) until their sine
// distance lands in (lo, hi]; returns the first accepted pair. Deterministic
// given the stream. Throws RejectionLimitExceeded after max_attempts.
std::pair<CoefVector, CoefVector> select_coefficient_pair(
    RandomStream& rng, int dim, double k_beta, double k_alpha, double lo,
    double hi, long max_attempts = 100000);

// Generates a dataset of size n: X entries iid standard normal (row by row),
// A_i ~ Bernoulli(expit(alpha0 + alpha1'X_i)) (one uniform per unit), then
// Y per the outcome spec (one normal per unit, always consumed even when
// noise_sd == 0). Throws DegenerateTreatment when all A_i are equal.
Dataset generate_dataset(RandomStream& rng, int n, double alpha0,
                         const CoefVector& alpha1,
                         const OutcomeModelSpec& outcome);

}  // namespace psmlab
