#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gate/data.hpp"
#include "gate/design.hpp"

namespace gate {

/// Per-point uncertainty d_j = |F(x_j) - alpha| over the unlabeled pool,
/// aligned with pool_indices.
struct UncertaintyScores {
  std::vector<int> pool_indices;
  std::vector<double> distances;
};

UncertaintyScores uncertainty_distances(const LogisticModel& model,
                                        const Eigen::MatrixXd& x_pool,
                                        const std::vector<int>& unlabeled);

/// Threshold rule over the scores: keep every index with d_j <= d0 where d0
/// is the h-th smallest distinct distance (the largest one when fewer than h
/// distinct values exist, i.e. the whole pool). Ties at d0 are all included.
std::vector<int> candidate_set(const UncertaintyScores& scores, int h);

struct CandidateThreshold {
  std::vector<int> indices;
  double d0 = 0.0;
};

/// candidate_set plus the threshold it used (one sort instead of two when
/// the caller records d0).
CandidateThreshold candidate_threshold(const UncertaintyScores& scores, int h);

/// Everything recorded while querying one batch.
struct BatchTrace {
  std::vector<int> queried;
  std::vector<int> labels;
  std::vector<int> candidate_sizes;
  std::vector<double> d0s;
  std::vector<FitReport> refit_reports;
};

struct BatchResult {
  DesignState state;
  std::vector<int> y_labeled;  // labels aligned with state.labeled
  BatchTrace trace;
};

/// Sequentially queries up to n_q points: at each step the uncertainty
/// distances are recomputed under the current estimate, the candidate set is
/// thresholded at the h-th distinct order statistic, the relative
/// D-efficiency argmax is queried, and the model is re-estimated
/// (warm-started) before the next step. Labels flow through the oracle and
/// the pool's labeled/unlabeled partition is kept in sync with the state.
///
/// Throws PoolExhausted when no unlabeled point exists at entry; a pool that
/// drains mid-batch yields a shorter trace instead.
BatchResult query_batch(DesignState state, std::vector<int> y_labeled,
                        DataPool& pool, LabelOracle& oracle, int n_q, int h,
                        const IrlsControls& controls);

}  // namespace gate
