#include "gate/query.hpp"

#include <algorithm>
#include <cmath>

namespace gate {

UncertaintyScores uncertainty_distances(const LogisticModel& model,
                                        const Eigen::MatrixXd& x_pool,
                                        const std::vector<int>& unlabeled) {
  if (unlabeled.empty()) throw EmptyPool("uncertainty_distances: empty pool");
  UncertaintyScores scores;
  scores.pool_indices = unlabeled;
  scores.distances.resize(unlabeled.size());
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const double p = predict_prob_row(model, x_pool, unlabeled[i]);
    scores.distances[i] = std::abs(p - model.alpha);
  }
  return scores;
}

CandidateThreshold candidate_threshold(const UncertaintyScores& scores, int h) {
  if (scores.pool_indices.empty()) throw EmptyPool("candidate_set: empty pool");
  if (h < 1) throw std::invalid_argument("candidate_set: h must be >= 1");

  // Exact distinct order statistics: sort and deduplicate.
  std::vector<double> distinct = scores.distances;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t rank = std::min<std::size_t>(h, distinct.size());

  CandidateThreshold out;
  out.d0 = distinct[rank - 1];
  for (std::size_t i = 0; i < scores.pool_indices.size(); ++i)
    if (scores.distances[i] <= out.d0) out.indices.push_back(scores.pool_indices[i]);
  return out;
}

std::vector<int> candidate_set(const UncertaintyScores& scores, int h) {
  return candidate_threshold(scores, h).indices;
}

BatchResult query_batch(DesignState state, std::vector<int> y_labeled,
                        DataPool& pool, LabelOracle& oracle, int n_q, int h,
                        const IrlsControls& controls) {
  if (n_q < 1) throw std::invalid_argument("query_batch: n_q must be >= 1");
  if (pool.unlabeled().empty())
    throw PoolExhausted("query_batch: no unlabeled points");
  if (y_labeled.size() != state.labeled.size())
    throw DimensionMismatch("query_batch: labels not aligned with design");

  BatchTrace trace;
  for (int t = 0; t < n_q; ++t) {
    if (pool.unlabeled().empty()) break;  // drained mid-batch

    const UncertaintyScores scores =
        uncertainty_distances(state.model, pool.x(), pool.unlabeled());
    const CandidateThreshold candidates = candidate_threshold(scores, h);

    const CandidateScore pick =
        score_candidates(state, candidates.indices, pool.x());
    const int label = oracle.reveal(pick.pool_index);

    pool.mark_labeled(pick.pool_index);
    state.labeled.push_back(pick.pool_index);
    y_labeled.push_back(label);

    // Immediate re-estimation, warm-started from the current coefficients.
    Eigen::VectorXd y(y_labeled.size());
    for (std::size_t i = 0; i < y_labeled.size(); ++i)
      y(static_cast<Eigen::Index>(i)) = y_labeled[i];
    const Eigen::MatrixXd x_fit =
        gather(pool.x(), state.labeled, state.model.active_vars);
    auto [model, report] = fit_irls(x_fit, y, state.model.active_vars,
                                    state.model.beta, controls,
                                    state.model.alpha);

    trace.queried.push_back(pick.pool_index);
    trace.labels.push_back(label);
    trace.candidate_sizes.push_back(static_cast<int>(candidates.indices.size()));
    trace.d0s.push_back(candidates.d0);
    trace.refit_reports.push_back(report);

    state = make_design_state(pool.x(), std::move(state.labeled), std::move(model));
  }
  return {std::move(state), std::move(y_labeled), std::move(trace)};
}

}  // namespace gate
