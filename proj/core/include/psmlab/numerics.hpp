#pragma once

#include <Eigen/Dense>

#include "psmlab/errors.hpp"

namespace psmlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

// Dense symmetric positive-definite matrix. Construction checks symmetry to
// a 1e-12 relative tolerance and stores the symmetrized entries; positive
// definiteness is established lazily by the Cholesky factorization, which
// reports SingularMatrix otherwise.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

  static SpdMatrix identity(int dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

 private:
  Matrix entries_;
};

// Lower-triangular Cholesky factor A = L L'. A pivot d <= 1e-12 * max(diag A)
// marks the matrix as numerically singular.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SpdMatrix& a);

  Vector solve(const Vector& b) const;
  Matrix inverse() const;

  // d' A^-1 d computed as |L^-1 d|^2; nonnegative by construction.
  double quad_form_inv(const Vector& d) const;

  const Matrix& lower() const { return l_; }

 private:
  Vector forward_substitute(const Vector& b) const;

  Matrix l_;
};

// Solves A x = b for SPD A; relative residual <= 1e-10 for well-posed
// systems. Throws SingularMatrix when the factorization pivots collapse.
Vector solve_spd(const SpdMatrix& a, const Vector& b);

// Unbiased sample covariance (divisor n - 1) of the rows of x; n >= 2.
SpdMatrix covariance_matrix(const Matrix& x);

double sample_mean(const Vector& x);
// Unbiased sample variance (divisor n - 1); length >= 2.
double sample_variance(const Vector& x);
double sample_sd(const Vector& x);

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace psmlab
