#include "gate/grafting.hpp"

#include <algorithm>
#include <cmath>

namespace gate {

std::vector<VariableScore> gradient_scores(const Eigen::MatrixXd& x_pool,
                                           const std::vector<int>& labeled,
                                           const Eigen::VectorXd& fitted_probs,
                                           const Eigen::VectorXd& y_labeled,
                                           const std::vector<int>& inactive) {
  if (inactive.empty())
    throw EmptyInactiveSet("gradient_scores: no inactive variables");
  const Eigen::Index n = static_cast<Eigen::Index>(labeled.size());
  if (fitted_probs.size() != n || y_labeled.size() != n)
    throw DimensionMismatch("gradient_scores: residual alignment mismatch");

  const Eigen::VectorXd residual = y_labeled - fitted_probs;
  std::vector<VariableScore> scores;
  scores.reserve(inactive.size());
  for (int u : inactive) {
    double dot = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      dot += x_pool(labeled[static_cast<std::size_t>(i)], u) * residual(i);
    scores.push_back({u, std::abs(dot)});
  }
  return scores;
}

int select_variable(const std::vector<VariableScore>& scores) {
  if (scores.empty()) throw EmptyInactiveSet("select_variable: no scores");
  const VariableScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.g > best->g || (s.g == best->g && s.var_index < best->var_index))
      best = &s;
  }
  return best->var_index;
}

StopDecision make_stop_decision(double m0, double m1, double epsilon) {
  if (m0 <= 0.0) throw std::invalid_argument("stop decision: m0 must be > 0");
  StopDecision d;
  d.m0 = m0;
  d.m1 = m1;
  d.crit = std::abs(m1 - m0) / m0;
  d.accept = d.crit >= epsilon;
  return d;
}

StopEvaluation evaluate_stop(const DesignState& current, int candidate_var,
                             const Eigen::MatrixXd& x_pool,
                             const Eigen::VectorXd& y_labeled, double epsilon,
                             const IrlsControls& controls) {
  if (current.singular())
    throw SingularBaseDesign("evaluate_stop: base design singular");
  for (int v : current.model.active_vars)
    if (v == candidate_var)
      throw std::invalid_argument("evaluate_stop: candidate already active");
  if (y_labeled.size() != static_cast<Eigen::Index>(current.labeled.size()))
    throw DimensionMismatch("evaluate_stop: label alignment mismatch");

  const int k = current.model.n_vars();
  const double m0 = std::exp(current.chol->log_det / k);

  std::vector<int> augmented = current.model.active_vars;
  augmented.push_back(candidate_var);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(k + 1);
  init.head(k) = current.model.beta;

  const Eigen::MatrixXd x_fit = gather(x_pool, current.labeled, augmented);
  auto [model, report] =
      fit_irls(x_fit, y_labeled, augmented, init, controls, current.model.alpha);

  StopEvaluation eval;
  eval.state = make_design_state(x_pool, current.labeled, std::move(model));
  eval.model = eval.state.model;
  eval.refit = report;
  if (eval.state.singular()) {
    eval.singular_augmented = true;
    eval.decision = StopDecision{0.0, m0, 0.0, false};
    return eval;
  }
  const double m1 = std::exp(eval.state.chol->log_det / (k + 1));
  eval.decision = make_stop_decision(m0, m1, epsilon);
  return eval;
}

}  // namespace gate
