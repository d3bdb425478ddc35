#include "gate/driver.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "gate/rng.hpp"

namespace gate {

namespace {

Eigen::VectorXd to_vector(const std::vector<int>& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

std::vector<int> inactive_of(int n_vars, const std::vector<int>& active) {
  std::vector<char> is_active(n_vars, 0);
  for (int v : active) is_active[v] = 1;
  std::vector<int> inactive;
  for (int j = 0; j < n_vars; ++j)
    if (!is_active[j]) inactive.push_back(j);
  return inactive;
}

// Train/test ACC, AUC and the test ROC; "train" means the full training
// split, not just the labeled subset.
void fill_metrics(RunResult& result, const DataPool& pool) {
  const auto eval = [&](const std::vector<int>& rows, double& acc, double& auc,
                        RocCurve* roc) {
    std::vector<int> pred(rows.size()), truth(rows.size());
    std::vector<double> score(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double p = predict_prob_row(result.final_model, pool.x(), rows[i]);
      score[i] = p;
      pred[i] = p > result.final_model.alpha ? 1 : 0;
      truth[i] = pool.label(rows[i]);
    }
    acc = accuracy(pred, truth);
    RocCurve curve = roc_auc(score, truth);
    auc = curve.auc;
    if (roc) *roc = std::move(curve);
  };
  eval(pool.train_idx, result.train_acc, result.train_auc, nullptr);
  eval(pool.test_idx, result.test_acc, result.test_auc, &result.test_roc);

  if (pool.truth) {
    result.selection = selection_quality(result.selected_vars,
                                         pool.truth->active_set, pool.cols());
  }
}

RunResult fit_and_evaluate(const DataPool& pool, const std::vector<int>& labeled,
                           const std::vector<int>& vars, double alpha,
                           const IrlsControls& controls) {
  Eigen::VectorXd y(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i)
    y(static_cast<Eigen::Index>(i)) = pool.label(labeled[i]);
  auto [model, report] = fit_irls(gather(pool.x(), labeled, vars), y, vars,
                                  Eigen::VectorXd(), controls, alpha);
  RunResult result;
  result.final_model = std::move(model);
  result.final_fit = report;
  result.labeled_count = static_cast<int>(labeled.size());
  result.selected_vars = vars;
  result.initial_labeled = labeled;
  result.termination = report.converged ? "converged" : "max_iterations";
  fill_metrics(result, pool);
  return result;
}

}  // namespace

ReplicationMetrics RunResult::metrics() const {
  ReplicationMetrics m;
  m.n = labeled_count;
  m.train_acc = train_acc;
  m.train_auc = train_auc;
  m.test_acc = test_acc;
  m.test_auc = test_auc;
  m.var_count = static_cast<double>(selected_vars.size());
  m.wall_time = wall_time_sec;
  if (selection) {
    m.tpr = selection->tpr;
    m.fpr = selection->fpr;
  }
  return m;
}

RunResult run_gate(const GateConfig& config, DataPool pool, LabelOracle& oracle) {
  const auto started = std::chrono::steady_clock::now();
  const int n_vars = pool.cols();
  if (config.n0 < 1 || config.n_q < 1 || config.h < 1)
    throw InvalidSpec("run_gate: n0, n_q and h must be >= 1");
  if (config.alpha <= 0.0 || config.alpha >= 1.0)
    throw InvalidSpec("run_gate: alpha must lie in (0,1)");
  if (config.epsilon <= 0.0) throw InvalidSpec("run_gate: epsilon must be > 0");
  if (static_cast<int>(pool.train_idx.size()) < config.n0 + config.n_q)
    throw InsufficientPool("run_gate: training pool smaller than n0 + n_q");
  if (pool.test_idx.empty())
    throw InvalidSpec("run_gate: a test split is required for evaluation");

  const int var_cap = config.max_vars > 0 ? std::min(config.max_vars, n_vars)
                                          : n_vars;

  pool = initial_split(std::move(pool), config.n0, config.seed);

  std::vector<int> active = config.initial_vars;
  if (active.empty()) {
    if (pool.intercept_col < 0)
      throw InvalidSpec("run_gate: no intercept column and no initial variables");
    active = {pool.intercept_col};
  }

  RunResult result;
  result.initial_labeled = pool.labeled();

  // Initial labels are revealed through the oracle too, so the query audit
  // covers the whole labeled set.
  std::vector<int> y_labeled;
  y_labeled.reserve(pool.labeled().size());
  for (int i : pool.labeled()) y_labeled.push_back(oracle.reveal(i));

  auto [model, init_report] =
      fit_irls(gather(pool.x(), pool.labeled(), active), to_vector(y_labeled),
               active, Eigen::VectorXd(), config.irls, config.alpha);
  DesignState state = make_design_state(pool.x(), pool.labeled(), std::move(model));

  result.termination = "stop_criterion";
  while (true) {
    if (pool.unlabeled().empty()) {
      result.termination = "pool_exhausted";
      break;
    }

    IterationRecord record;
    BatchResult batch = query_batch(std::move(state), std::move(y_labeled), pool,
                                    oracle, config.n_q, config.h, config.irls);
    state = std::move(batch.state);
    y_labeled = std::move(batch.y_labeled);
    record.batch = std::move(batch.trace);

    if (static_cast<int>(record.batch.queried.size()) < config.n_q) {
      // The pool drained mid-batch; end the run with the partial batch.
      result.termination = "pool_exhausted";
      result.iterations.push_back(std::move(record));
      break;
    }

    if (state.singular()) {
      // No usable stopping criterion without |M|; stop rather than loop
      // without an exit condition.
      result.termination = "singular_design";
      result.iterations.push_back(std::move(record));
      break;
    }

    const std::vector<int> inactive = inactive_of(n_vars, state.model.active_vars);
    if (inactive.empty() || state.model.n_vars() >= var_cap) {
      result.termination = inactive.empty() ? "all_vars_active" : "var_cap";
      result.iterations.push_back(std::move(record));
      break;
    }

    Eigen::VectorXd probs(state.labeled.size());
    for (std::size_t i = 0; i < state.labeled.size(); ++i)
      probs(static_cast<Eigen::Index>(i)) =
          predict_prob_row(state.model, pool.x(), state.labeled[i]);
    const auto scores = gradient_scores(pool.x(), state.labeled, probs,
                                        to_vector(y_labeled), inactive);
    record.candidate_var = select_variable(scores);

    StopEvaluation eval =
        evaluate_stop(state, record.candidate_var, pool.x(),
                      to_vector(y_labeled), config.epsilon, config.irls);
    record.evaluated = true;
    record.stop = eval.decision;
    record.singular_augmented = eval.singular_augmented;
    record.accepted = eval.decision.accept;
    result.iterations.push_back(std::move(record));

    if (!eval.decision.accept) break;  // variable discarded; loop ends
    state = std::move(eval.state);     // accepted refit reused as-is
  }

  // Final refit on everything labeled with the selected variables.
  auto [final_model, final_report] =
      fit_irls(gather(pool.x(), state.labeled, state.model.active_vars),
               to_vector(y_labeled), state.model.active_vars, state.model.beta,
               config.irls, config.alpha);
  result.final_model = std::move(final_model);
  result.final_fit = final_report;
  result.labeled_count = static_cast<int>(state.labeled.size());
  result.selected_vars = result.final_model.active_vars;
  fill_metrics(result, pool);
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

RunResult run_baseline_full(const DataPool& pool, double alpha,
                            const IrlsControls& controls) {
  const auto started = std::chrono::steady_clock::now();
  std::vector<int> all_vars(pool.cols());
  std::iota(all_vars.begin(), all_vars.end(), 0);
  RunResult result =
      fit_and_evaluate(pool, pool.train_idx, all_vars, alpha, controls);
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

RunResult run_baseline_random_selected(const DataPool& pool, int n,
                                       const std::vector<int>& vars,
                                       std::uint64_t seed, double alpha,
                                       const IrlsControls& controls) {
  if (n < 1 || n > static_cast<int>(pool.train_idx.size()))
    throw InsufficientPool("baseline: n exceeds the training pool");
  if (vars.empty()) throw InvalidSpec("baseline: variable set empty");
  const auto started = std::chrono::steady_clock::now();
  Rng rng(seed);
  std::vector<int> labeled = rng.take(pool.train_idx, static_cast<std::size_t>(n));
  std::sort(labeled.begin(), labeled.end());
  RunResult result = fit_and_evaluate(pool, labeled, vars, alpha, controls);
  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

RunResult run_baseline_random_full(const DataPool& pool, int n,
                                   std::uint64_t seed, double alpha,
                                   const IrlsControls& controls) {
  std::vector<int> all_vars(pool.cols());
  std::iota(all_vars.begin(), all_vars.end(), 0);
  return run_baseline_random_selected(pool, n, all_vars, seed, alpha, controls);
}

}  // namespace gate
