#include "gate/design.hpp"

#include <cmath>

namespace gate {

double DesignState::log_det() const {
  if (!chol) throw SingularBaseDesign("design state: information matrix singular");
  return chol->log_det;
}

double subject_weight(const LogisticModel& model, const Eigen::VectorXd& x_active) {
  if (x_active.size() != model.beta.size())
    throw DimensionMismatch("subject_weight: x not aligned with active variables");
  // F(1-F) as a product of two sigmoids: still accurate (~e^-|eta|) in the
  // saturated regime where 1-F would cancel to zero.
  const double eta = model.beta.dot(x_active);
  return sigmoid(eta) * sigmoid(-eta);
}

SymMatrix information_matrix(const Eigen::MatrixXd& x_active_rows,
                             const LogisticModel& model) {
  const Eigen::Index n = x_active_rows.rows();
  const Eigen::Index k = x_active_rows.cols();
  if (n < 1) throw DimensionMismatch("information_matrix: need >= 1 row");
  if (k != model.beta.size())
    throw DimensionMismatch("information_matrix: columns not aligned with model");

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = subject_weight(model, x_active_rows.row(i));
    m.selfadjointView<Eigen::Lower>().rankUpdate(x_active_rows.row(i).transpose(), w);
  }
  m = m.selfadjointView<Eigen::Lower>();
  m /= static_cast<double>(n);
  return SymMatrix(m);
}

DesignState make_design_state(const Eigen::MatrixXd& x_pool,
                              std::vector<int> labeled, LogisticModel model) {
  const Eigen::MatrixXd x = gather(x_pool, labeled, model.active_vars);
  DesignState state;
  state.info = information_matrix(x, model);
  state.chol = cholesky(state.info);
  state.labeled = std::move(labeled);
  state.model = std::move(model);
  return state;
}

double re_d_efficiency_given_weight(const DesignState& state,
                                    const Eigen::VectorXd& x_active, double w) {
  if (state.singular())
    throw SingularBaseDesign("re_d_efficiency: base design singular");
  const double n = static_cast<double>(state.n());
  const double c = n / (n + 1.0);
  const double ld1 = logdet_rank_one(*state.chol, c, w / (n + 1.0), x_active);
  const double p = static_cast<double>(x_active.size());
  return std::exp((ld1 - state.chol->log_det) / p) - 1.0;
}

double re_d_efficiency(const DesignState& state, const Eigen::VectorXd& x_active) {
  return re_d_efficiency_given_weight(state, x_active,
                                      subject_weight(state.model, x_active));
}

CandidateScore score_candidates(const DesignState& state,
                                const std::vector<int>& candidates,
                                const Eigen::MatrixXd& x_pool) {
  if (candidates.empty())
    throw EmptyCandidateSet("score_candidates: no candidates");

  CandidateScore best;
  if (!state.singular()) {
    for (int idx : candidates) {
      const Eigen::VectorXd x = gather_row(x_pool, idx, state.model.active_vars);
      const double v = re_d_efficiency(state, x);
      if (best.pool_index < 0 || v > best.value ||
          (v == best.value && idx < best.pool_index)) {
        best = {idx, v};
      }
    }
    return best;
  }

  // Singular base design: factor each updated matrix directly; candidates
  // whose update is factorable always beat the w*x^T*x fallback tier.
  const double n = static_cast<double>(state.n());
  bool best_factorable = false;
  for (int idx : candidates) {
    const Eigen::VectorXd x = gather_row(x_pool, idx, state.model.active_vars);
    const double w = subject_weight(state.model, x);
    Eigen::MatrixXd updated =
        (n * state.info.dense() + w * x * x.transpose()) / (n + 1.0);
    const auto factor = cholesky(SymMatrix(updated));
    const bool factorable = factor.has_value();
    const double v = factorable ? factor->log_det : w * x.squaredNorm();

    bool better = false;
    if (best.pool_index < 0) {
      better = true;
    } else if (factorable != best_factorable) {
      better = factorable;
    } else {
      better = v > best.value || (v == best.value && idx < best.pool_index);
    }
    if (better) {
      best = {idx, v};
      best_factorable = factorable;
    }
  }
  return best;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          x(rows[i], cols[j]);
  return out;
}

Eigen::VectorXd gather_row(const Eigen::MatrixXd& x, int row,
                           const std::vector<int>& cols) {
  Eigen::VectorXd out(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    out(static_cast<Eigen::Index>(j)) = x(row, cols[j]);
  return out;
}

}  // namespace gate
