#include "gate/linalg.hpp"

#include <cmath>

namespace gate {

std::optional<CholFactor> cholesky(const SymMatrix& s, int* failed_pivot) {
  const int n = s.dim();
  const Eigen::MatrixXd& a = s.dense();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  double log_det = 0.0;

  for (int j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= kCholeskyPivotTol) {
      if (failed_pivot) *failed_pivot = j;
      return std::nullopt;
    }
    l(j, j) = std::sqrt(d);
    log_det += 2.0 * std::log(l(j, j));
    for (int i = j + 1; i < n; ++i) {
      const double sum = l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = (a(i, j) - sum) / l(j, j);
    }
  }
  return CholFactor{std::move(l), log_det};
}

Eigen::VectorXd solve(const CholFactor& f, const Eigen::VectorXd& b) {
  const int n = f.dim();
  if (b.size() != n)
    throw DimensionMismatch("solve: rhs length does not match factor dim");

  // forward substitution L y = b
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = (b(i) - f.lower.row(i).head(i).dot(y.head(i))) / f.lower(i, i);
  }
  // back substitution L^T x = y
  Eigen::VectorXd x(n);
  for (int i = n - 1; i >= 0; --i) {
    const double sum = f.lower.col(i).tail(n - i - 1).dot(x.tail(n - i - 1));
    x(i) = (y(i) - sum) / f.lower(i, i);
  }
  return x;
}

double logdet_rank_one(const CholFactor& f, double c, double w,
                       const Eigen::VectorXd& x) {
  const int n = f.dim();
  if (x.size() != n)
    throw DimensionMismatch("logdet_rank_one: vector length mismatch");
  if (c <= 0.0) throw std::invalid_argument("logdet_rank_one: c must be > 0");
  if (w < 0.0) throw std::invalid_argument("logdet_rank_one: w must be >= 0");

  // x^T A^{-1} x = ||L^{-1} x||^2, one triangular solve.
  Eigen::VectorXd u(n);
  for (int i = 0; i < n; ++i) {
    u(i) = (x(i) - f.lower.row(i).head(i).dot(u.head(i))) / f.lower(i, i);
  }
  const double quad = u.squaredNorm();
  return n * std::log(c) + f.log_det + std::log1p((w / c) * quad);
}

}  // namespace gate
