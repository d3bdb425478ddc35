#pragma once

#include <Eigen/Dense>
#include <optional>

#include "gate/errors.hpp"

namespace gate {

// Pivot threshold below which a Cholesky pivot counts as non-positive.
// Information matrices built from tiny labeled sets are routinely singular,
// so factorization failure is a recoverable signal, not a crash.
inline constexpr double kCholeskyPivotTol = 1e-12;

/// Dense symmetric matrix. Symmetry is enforced on construction by averaging
/// the input with its transpose; dim >= 1.
class SymMatrix {
 public:
  explicit SymMatrix(int dim) : m_(Eigen::MatrixXd::Zero(dim, dim)) {
    if (dim < 1) throw DimensionMismatch("SymMatrix: dim must be >= 1");
  }

  explicit SymMatrix(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols() || a.rows() < 1)
      throw DimensionMismatch("SymMatrix: input must be square, dim >= 1");
    m_ = 0.5 * (a + a.transpose());
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Eigen::MatrixXd& dense() const { return m_; }

 private:
  Eigen::MatrixXd m_;
};

/// Lower-triangular Cholesky factor L with L L^T = A, plus the cached
/// log-determinant of A (= 2 * sum_i log L(i,i)).
struct CholFactor {
  Eigen::MatrixXd lower;
  double log_det = 0.0;

  int dim() const { return static_cast<int>(lower.rows()); }
};

/// Factors a symmetric matrix. Returns nullopt when a pivot falls at or below
/// kCholeskyPivotTol (matrix not positive-definite); in that case
/// *failed_pivot, when given, receives the offending pivot index.
std::optional<CholFactor> cholesky(const SymMatrix& s,
                                   int* failed_pivot = nullptr);

/// Solves (L L^T) x = b via forward and back substitution.
Eigen::VectorXd solve(const CholFactor& f, const Eigen::VectorXd& b);

/// Log-determinant of c*A + w*x*x^T without refactoring, where f factors A:
/// log|c*A| + log(1 + (w/c) * x^T A^{-1} x). Requires c > 0, w >= 0.
double logdet_rank_one(const CholFactor& f, double c, double w,
                       const Eigen::VectorXd& x);

}  // namespace gate
