#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gate/linalg.hpp"
#include "gate/logistic.hpp"

namespace gate {

/// Current design: labeled pool indices, the fitted model over its active
/// variables, and the normalized information matrix M = X^T W X / n with its
/// Cholesky factor (absent when M is singular).
struct DesignState {
  std::vector<int> labeled;
  LogisticModel model;
  SymMatrix info{1};
  std::optional<CholFactor> chol;

  int n() const { return static_cast<int>(labeled.size()); }
  bool singular() const { return !chol.has_value(); }
  double log_det() const;  // throws SingularBaseDesign when singular
};

/// w(x) = F(x)(1-F(x)) for an active-restricted point; in [0, 1/4].
double subject_weight(const LogisticModel& model, const Eigen::VectorXd& x_active);

/// M = X^T W X / n over the given active-restricted rows.
SymMatrix information_matrix(const Eigen::MatrixXd& x_active_rows,
                             const LogisticModel& model);

/// Builds the design state for a labeled set: gathers rows/columns from the
/// pool, assembles the information matrix and attempts its factorization.
DesignState make_design_state(const Eigen::MatrixXd& x_pool,
                              std::vector<int> labeled, LogisticModel model);

/// Relative D-efficiency of augmenting the design with one candidate point:
/// (|M_{n+1}|^{1/p} - |M_n|^{1/p}) / |M_n|^{1/p}, where
/// M_{n+1} = (n M_n + w x x^T) / (n+1). Computed through the determinant
/// lemma; always > -1. Throws SingularBaseDesign when the state is singular.
double re_d_efficiency(const DesignState& state, const Eigen::VectorXd& x_active);

/// Same quantity for an externally supplied weight (shared path; also makes
/// the weight-monotonicity of the criterion directly testable).
double re_d_efficiency_given_weight(const DesignState& state,
                                    const Eigen::VectorXd& x_active, double w);

struct CandidateScore {
  int pool_index = -1;
  double value = 0.0;
};

/// Argmax of relative D-efficiency over candidate pool indices, ties broken
/// by lowest pool index. On a singular base design the candidates are scored
/// by the log-determinant of the directly factored updated matrix, falling
/// back to the largest w * x^T x when every update remains singular.
CandidateScore score_candidates(const DesignState& state,
                                const std::vector<int>& candidates,
                                const Eigen::MatrixXd& x_pool);

/// Gathers rows x cols of a matrix into a dense block.
Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const std::vector<int>& rows,
                       const std::vector<int>& cols);

/// Gathers the given columns of one row into a vector.
Eigen::VectorXd gather_row(const Eigen::MatrixXd& x, int row,
                           const std::vector<int>& cols);

}  // namespace gate
