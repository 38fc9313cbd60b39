#include "psmlab/numerics.hpp"

#include <cmath>
#include <string>

namespace psmlab {

namespace {
constexpr double kSymmetryTol = 1e-12;
constexpr double kPivotTol = 1e-12;
}  // namespace

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw Error("SpdMatrix: entries must be square and non-empty");
  }
  const double scale = entries_.cwiseAbs().maxCoeff();
  const double asym = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTol * std::max(scale, 1.0)) {
    throw Error("SpdMatrix: entries not symmetric (max asymmetry " +
                std::to_string(asym) + ")");
  }
  entries_ = ((entries_ + entries_.transpose()) / 2.0).eval();
}

CholeskyFactor::CholeskyFactor(const SpdMatrix& a) {
  const Matrix& m = a.entries();
  const int n = a.dim();
  const double max_diag = std::max(m.diagonal().maxCoeff(), 0.0);
  l_ = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (d <= kPivotTol * max_diag) {
      throw SingularMatrix("Cholesky pivot " + std::to_string(d) +
                           " at column " + std::to_string(j) +
                           " below tolerance");
    }
    l_(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / l_(j, j);
    }
  }
}

Vector CholeskyFactor::forward_substitute(const Vector& b) const {
  const int n = static_cast<int>(l_.rows());
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    double s = b(i);
    for (int k = 0; k < i; ++k) s -= l_(i, k) * y(k);
    y(i) = s / l_(i, i);
  }
  return y;
}

Vector CholeskyFactor::solve(const Vector& b) const {
  const int n = static_cast<int>(l_.rows());
  if (b.size() != n) throw Error("CholeskyFactor::solve: dimension mismatch");
  Vector y = forward_substitute(b);
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double s = y(i);
    for (int k = i + 1; k < n; ++k) s -= l_(k, i) * x(k);
    x(i) = s / l_(i, i);
  }
  return x;
}

Matrix CholeskyFactor::inverse() const {
  const int n = static_cast<int>(l_.rows());
  Matrix inv(n, n);
  for (int j = 0; j < n; ++j) {
    inv.col(j) = solve(Vector::Unit(n, j));
  }
  // Symmetrize away round-off so downstream SpdMatrix construction succeeds.
  return ((inv + inv.transpose()) / 2.0).eval();
}

double CholeskyFactor::quad_form_inv(const Vector& d) const {
  if (d.size() != l_.rows()) {
    throw Error("CholeskyFactor::quad_form_inv: dimension mismatch");
  }
  return forward_substitute(d).squaredNorm();
}

Vector solve_spd(const SpdMatrix& a, const Vector& b) {
  if (a.dim() != b.size()) throw Error("solve_spd: dimension mismatch");
  return CholeskyFactor(a).solve(b);
}

SpdMatrix covariance_matrix(const Matrix& x) {
  const auto n = x.rows();
  if (n < 2) {
    throw InsufficientRows("covariance_matrix requires at least 2 rows, got " +
                           std::to_string(n));
  }
  const Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  return SpdMatrix(std::move(cov));
}

double sample_mean(const Vector& x) {
  if (x.size() == 0) throw InsufficientRows("sample_mean of empty vector");
  return x.mean();
}

double sample_variance(const Vector& x) {
  const auto n = x.size();
  if (n < 2) {
    throw InsufficientRows("sample_variance requires at least 2 values, got " +
                           std::to_string(n));
  }
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(n - 1);
}

double sample_sd(const Vector& x) { return std::sqrt(sample_variance(x)); }

}  // namespace psmlab
