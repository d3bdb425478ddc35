#include "gate/driver.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "gate/rng.hpp"

using namespace gate;

namespace {

// Pool with one strong predictor (variable 1) among mostly-noise features.
DataPool strong_predictor_pool(std::uint64_t seed, int n, int p, int test) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta(0) = 0.2;
  beta(1) = 3.0;
  return gen_synthetic(TrueModelSpec::custom(beta), n, p, test, seed);
}

GateConfig small_config(std::uint64_t seed) {
  GateConfig cfg;
  cfg.n0 = 20;
  cfg.n_q = 10;
  cfg.h = 15;
  cfg.seed = seed;
  return cfg;
}

std::string trace_fingerprint(const RunResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.labeled_count << '|' << r.termination << '|';
  for (int v : r.selected_vars) os << v << ',';
  for (int v : r.initial_labeled) os << v << ',';
  os << '|';
  for (const auto& it : r.iterations) {
    for (int q : it.batch.queried) os << q << ',';
    for (int l : it.batch.labels) os << l << ',';
    for (int c : it.batch.candidate_sizes) os << c << ',';
    for (double d : it.batch.d0s) os << d << ',';
    os << it.candidate_var << '/' << it.evaluated << '/' << it.accepted << '/'
       << it.stop.m0 << '/' << it.stop.m1 << '/' << it.stop.crit << ';';
  }
  os << '|' << r.train_acc << '|' << r.test_acc << '|';
  for (int i = 0; i < r.final_model.beta.size(); ++i)
    os << r.final_model.beta(i) << ',';
  return os.str();
}

}  // namespace

TEST_CASE("gate finds the strong predictor on a tiny instance") {
  auto pool = strong_predictor_pool(811, 260, 4, 60);
  LabelOracle oracle(pool);
  const RunResult r = run_gate(small_config(5), pool, oracle);

  CHECK(std::count(r.selected_vars.begin(), r.selected_vars.end(), 1) == 1);
  CHECK(std::count(r.selected_vars.begin(), r.selected_vars.end(), 0) == 1);

  // Reference: one fit on the whole training split with every variable.
  const RunResult full = run_baseline_full(pool);
  CHECK(std::abs(r.test_acc - full.test_acc) <= 0.05);
}

TEST_CASE("run invariants: firewall, forward-only growth, counts, audit") {
  auto pool = strong_predictor_pool(821, 300, 6, 80);
  LabelOracle oracle(pool);
  const RunResult r = run_gate(small_config(7), pool, oracle);

  // No test point is ever queried.
  std::vector<char> is_test(pool.rows(), 0);
  for (int i : pool.test_idx) is_test[i] = 1;
  for (int i : r.initial_labeled) CHECK_FALSE(is_test[i]);
  int queried_total = 0;
  for (const auto& it : r.iterations) {
    for (int q : it.batch.queried) CHECK_FALSE(is_test[q]);
    queried_total += static_cast<int>(it.batch.queried.size());
  }

  // Labeled count equals the trace-implied count; the oracle audit agrees.
  CHECK(r.labeled_count ==
        static_cast<int>(r.initial_labeled.size()) + queried_total);
  CHECK(oracle.query_count() == r.labeled_count);

  // Forward-only: the intercept start is retained.
  CHECK(std::find(r.selected_vars.begin(), r.selected_vars.end(), 0) !=
        r.selected_vars.end());

  // Every completed iteration queried exactly n_q points.
  for (std::size_t i = 0; i + 1 < r.iterations.size(); ++i)
    CHECK(r.iterations[i].batch.queried.size() == 10);

  // Iterations before the last must have accepted their variable.
  for (std::size_t i = 0; i + 1 < r.iterations.size(); ++i)
    CHECK(r.iterations[i].accepted);

  // Selection metrics exist for synthetic truth.
  REQUIRE(r.selection.has_value());
  CHECK(r.selection->tpr >= 0.0);
  CHECK(r.selection->tpr <= 1.0);
}

TEST_CASE("replays with the same seed are identical, different seeds differ") {
  auto pool_a = strong_predictor_pool(831, 280, 5, 60);
  auto pool_b = strong_predictor_pool(831, 280, 5, 60);
  LabelOracle oracle_a(pool_a), oracle_b(pool_b);
  const RunResult a = run_gate(small_config(11), pool_a, oracle_a);
  const RunResult b = run_gate(small_config(11), pool_b, oracle_b);
  CHECK(trace_fingerprint(a) == trace_fingerprint(b));

  auto pool_c = strong_predictor_pool(831, 280, 5, 60);
  LabelOracle oracle_c(pool_c);
  const RunResult c = run_gate(small_config(12), pool_c, oracle_c);
  CHECK(trace_fingerprint(a) != trace_fingerprint(c));
}

TEST_CASE("a pool of exactly n0 + n_q points ends after at most one iteration") {
  // 30 training points: n0 = 20 labeled, one batch of 10 drains the pool.
  auto pool = strong_predictor_pool(841, 90, 4, 60);
  REQUIRE(pool.train_idx.size() == 30);
  LabelOracle oracle(pool);
  const RunResult r = run_gate(small_config(13), pool, oracle);
  CHECK(r.labeled_count == 30);
  CHECK(r.iterations.size() <= 2);  // one full batch, possibly one empty probe
  CHECK(r.termination == "pool_exhausted");
  CHECK(r.test_acc >= 0.0);
  CHECK(r.final_model.beta.size() ==
        static_cast<Eigen::Index>(r.selected_vars.size()));
}

TEST_CASE("run_gate validates its inputs") {
  auto pool = strong_predictor_pool(851, 100, 4, 80);  // only 20 training points
  LabelOracle oracle(pool);
  CHECK_THROWS_AS(run_gate(small_config(1), pool, oracle), InsufficientPool);

  auto pool2 = strong_predictor_pool(853, 200, 4, 50);
  LabelOracle oracle2(pool2);
  GateConfig bad = small_config(1);
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(run_gate(bad, pool2, oracle2), InvalidSpec);
  bad = small_config(1);
  bad.alpha = 1.0;
  CHECK_THROWS_AS(run_gate(bad, pool2, oracle2), InvalidSpec);
}

TEST_CASE("max_vars caps the forward selection") {
  auto pool = strong_predictor_pool(861, 400, 6, 100);
  LabelOracle oracle(pool);
  GateConfig cfg = small_config(17);
  cfg.max_vars = 2;
  const RunResult r = run_gate(cfg, pool, oracle);
  CHECK(r.selected_vars.size() <= 2);
  if (r.selected_vars.size() == 2) {
    const bool capped = r.termination == "var_cap" ||
                        r.termination == "stop_criterion" ||
                        r.termination == "pool_exhausted";
    CHECK(capped);
  }
}

TEST_CASE("baseline on the full pool reproduces a plain fit") {
  auto pool = strong_predictor_pool(871, 300, 4, 80);
  const RunResult r = run_baseline_full(pool);
  CHECK(r.labeled_count == 220);
  CHECK(r.selected_vars.size() == 4);
  CHECK(r.train_acc > 0.5);
  CHECK(r.selection.has_value());
  CHECK(r.selection->fpr == 1.0);  // all variables taken
}

TEST_CASE("baseline full fit surfaces singularity on a degenerate pool") {
  // One training point cannot identify four coefficients without a ridge.
  auto pool = strong_predictor_pool(881, 100, 4, 50);
  pool.train_idx.resize(1);
  pool.set_labeled({});
  CHECK_THROWS_AS(run_baseline_full(pool), SingularSystem);
}

TEST_CASE("random-subject baselines are seeded and deterministic") {
  auto pool = strong_predictor_pool(891, 400, 5, 100);
  const RunResult c1 =
      run_baseline_random_selected(pool, 60, {0, 1}, 99);
  const RunResult c2 =
      run_baseline_random_selected(pool, 60, {0, 1}, 99);
  CHECK(c1.initial_labeled == c2.initial_labeled);
  CHECK(c1.test_acc == c2.test_acc);
  CHECK(c1.final_model.beta == c2.final_model.beta);

  const RunResult c3 =
      run_baseline_random_selected(pool, 60, {0, 1}, 100);
  CHECK(c1.initial_labeled != c3.initial_labeled);

  CHECK_THROWS_AS(run_baseline_random_selected(pool, 0, {0, 1}, 1),
                  InsufficientPool);
  CHECK_THROWS_AS(run_baseline_random_selected(pool, 301, {0, 1}, 1),
                  InsufficientPool);
  CHECK_THROWS_AS(run_baseline_random_selected(pool, 10, {}, 1), InvalidSpec);
}

TEST_CASE("underdetermined random baseline leans on the ridge fallback") {
  // n = 8 labeled points, 12 variables: singular normal equations.
  auto pool = strong_predictor_pool(901, 300, 12, 100);
  const RunResult d = run_baseline_random_full(pool, 8, 7);
  CHECK(d.labeled_count == 8);
  CHECK(d.final_fit.ridge_used > 0.0);
  for (int i = 0; i < d.final_model.beta.size(); ++i)
    CHECK(std::isfinite(d.final_model.beta(i)));
}

TEST_CASE("matched-n baseline uses the same labeled budget as the active run") {
  auto pool = strong_predictor_pool(911, 350, 5, 80);
  LabelOracle oracle(pool);
  const RunResult a = run_gate(small_config(19), pool, oracle);
  const RunResult d = run_baseline_random_full(pool, a.labeled_count, 21);
  CHECK(d.labeled_count == a.labeled_count);
  const RunResult c = run_baseline_random_selected(pool, a.labeled_count,
                                                   a.selected_vars, 22);
  CHECK(c.selected_vars == a.selected_vars);
}
