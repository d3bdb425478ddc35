#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gate/data.hpp"
#include "gate/grafting.hpp"
#include "gate/metrics.hpp"
#include "gate/query.hpp"

namespace gate {

struct GateConfig {
  int n0 = 100;            // initial labeled size
  int n_q = 30;            // batch size
  int h = 200;             // candidate-scope order statistic
  double alpha = 0.5;      // classification threshold
  double epsilon = 1e-2;   // stopping threshold
  int max_vars = 0;        // cap on |active set|; 0 means all variables
  IrlsControls irls;
  std::uint64_t seed = 0;
  std::vector<int> initial_vars;  // empty -> intercept column only
};

/// One outer iteration: the queried batch plus the variable decision.
struct IterationRecord {
  BatchTrace batch;
  int candidate_var = -1;
  StopDecision stop;
  bool evaluated = false;  // false when the iteration ended before the stop check
  bool accepted = false;
  bool singular_augmented = false;
};

struct RunResult {
  LogisticModel final_model;
  FitReport final_fit;
  int labeled_count = 0;
  std::vector<int> selected_vars;
  std::vector<int> initial_labeled;
  double train_acc = 0.0;
  double train_auc = 0.0;
  double test_acc = 0.0;
  double test_auc = 0.0;
  RocCurve test_roc;
  std::optional<SelectionQuality> selection;
  std::vector<IterationRecord> iterations;
  std::string termination;  // stop_criterion | pool_exhausted | all_vars_active | singular_design
  double wall_time_sec = 0.0;

  ReplicationMetrics metrics() const;
};

/// Runs the full loop: initial fit on n0 randomly labeled points, then
/// alternating batch query and greedy forward variable selection until the
/// relative D-deficiency falls below epsilon (or the pool or variable set is
/// exhausted), final refit, and train/test evaluation. Deterministic given
/// config.seed.
RunResult run_gate(const GateConfig& config, DataPool pool, LabelOracle& oracle);

/// Single fit of all variables on the whole training split. The ridge
/// fallback is disabled here: an underdetermined full fit surfaces
/// SingularSystem instead of silently regularizing.
RunResult run_baseline_full(const DataPool& pool, double alpha = 0.5,
                            const IrlsControls& controls = {.ridge_fallback = false});

/// n uniformly sampled labeled points, fit restricted to the given variables.
RunResult run_baseline_random_selected(const DataPool& pool, int n,
                                       const std::vector<int>& vars,
                                       std::uint64_t seed, double alpha = 0.5,
                                       const IrlsControls& controls = {});

/// n uniformly sampled labeled points, all variables.
RunResult run_baseline_random_full(const DataPool& pool, int n,
                                   std::uint64_t seed, double alpha = 0.5,
                                   const IrlsControls& controls = {});

}  // namespace gate
