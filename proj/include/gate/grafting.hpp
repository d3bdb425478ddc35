#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gate/design.hpp"

namespace gate {

/// Grafting score of one inactive variable: the magnitude of the
/// log-likelihood gradient at coefficient zero,
/// g_u = |sum_{i in labeled} x_{i,u} (y_i - p_i)|.
struct VariableScore {
  int var_index = -1;
  double g = 0.0;
};

/// Scores every inactive variable against the residuals of the current fit.
/// fitted_probs and y_labeled are aligned with the labeled index list.
std::vector<VariableScore> gradient_scores(const Eigen::MatrixXd& x_pool,
                                           const std::vector<int>& labeled,
                                           const Eigen::VectorXd& fitted_probs,
                                           const Eigen::VectorXd& y_labeled,
                                           const std::vector<int>& inactive);

/// Variable with the largest score; ties broken by lowest variable index.
int select_variable(const std::vector<VariableScore>& scores);

/// Stopping decision: crit = |m1 - m0| / m0 comparing the dimension-
/// normalized determinants |M|^{1/k} before and after adding a variable.
/// accept is true iff crit >= epsilon (the loop stops when crit < epsilon).
struct StopDecision {
  double crit = 0.0;
  double m0 = 0.0;
  double m1 = 0.0;
  bool accept = false;
};

StopDecision make_stop_decision(double m0, double m1, double epsilon);

struct StopEvaluation {
  StopDecision decision;
  LogisticModel model;      // refit over k+1 variables; reused on accept
  DesignState state;        // matching design state
  FitReport refit;
  bool singular_augmented = false;
};

/// Refits with active_vars + {candidate_var} on the same labeled set, builds
/// the augmented information matrix, and compares the normalized
/// determinants. A singular augmented design counts as no measurable
/// information gain: crit = 0, m1 = 0, accept = false.
StopEvaluation evaluate_stop(const DesignState& current, int candidate_var,
                             const Eigen::MatrixXd& x_pool,
                             const Eigen::VectorXd& y_labeled, double epsilon,
                             const IrlsControls& controls);

}  // namespace gate
