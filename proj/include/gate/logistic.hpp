#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "gate/errors.hpp"

namespace gate {

/// Logistic classifier over a subset of the global variables.
/// beta is aligned with active_vars; alpha is the classification threshold.
struct LogisticModel {
  std::vector<int> active_vars;
  Eigen::VectorXd beta;
  double alpha = 0.5;

  int n_vars() const { return static_cast<int>(active_vars.size()); }
};

struct FitReport {
  bool converged = false;
  int iterations = 0;
  double final_loglik = 0.0;
  double ridge_used = 0.0;
  double max_abs_step = 0.0;
};

struct IrlsControls {
  double tol = 1e-8;
  int max_iter = 50;
  double ridge = 0.0;         // initial penalty; the ladder escalates from here
  bool ridge_fallback = true; // escalate through {1e-8,1e-6,1e-4,1e-2} on singularity
  int max_halvings = 30;
};

/// Numerically stable 1/(1 + exp(-eta)); strictly inside (0,1) for finite eta.
double sigmoid(double eta) noexcept;

/// F(x | beta) for x already restricted to the model's active variables.
double predict_prob(const LogisticModel& model, const Eigen::VectorXd& x_active);

/// Row variant: gathers the active columns of X for the given row.
double predict_prob_row(const LogisticModel& model, const Eigen::MatrixXd& x_pool,
                        int row);

/// 1 iff predicted probability strictly exceeds model.alpha.
int classify(const LogisticModel& model, const Eigen::VectorXd& x_active);

/// Bernoulli log-likelihood sum over rows of x (already active-restricted);
/// always <= 0, stable for large |eta|. Empty data gives 0.
double log_likelihood(const LogisticModel& model, const Eigen::MatrixXd& x,
                      const Eigen::VectorXd& y);

/// Score vector d log-lik / d beta = X^T (y - p) at the given coefficients.
Eigen::VectorXd loglik_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta);

/// Maximum-likelihood fit by iteratively reweighted least squares.
///
/// x holds the active-restricted rows, y the binary labels. init_beta warm
/// starts the iteration (empty -> zeros). The penalized log-likelihood is
/// kept non-decreasing by step halving; when the weighted normal equations
/// are singular the ridge ladder {1e-8,1e-6,1e-4,1e-2} is climbed until the
/// factorization succeeds (reported in FitReport::ridge_used). Throws
/// SingularSystem when the ladder is exhausted or disabled.
std::pair<LogisticModel, FitReport> fit_irls(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
    std::vector<int> active_vars, const Eigen::VectorXd& init_beta,
    const IrlsControls& controls = {}, double alpha = 0.5);

}  // namespace gate
