#include "gate/grafting.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gate/rng.hpp"

using namespace gate;

namespace {

Eigen::MatrixXd random_pool(Rng& rng, int n, int p) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (int j = 1; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

struct Fitted {
  Eigen::MatrixXd pool;
  std::vector<int> labeled;
  LogisticModel model;
  Eigen::VectorXd probs;     // fitted probabilities over labeled
  Eigen::VectorXd y;         // labels over labeled
  std::vector<int> inactive;
};

Fitted fitted_instance(Rng& rng, int n, int p, int k_active) {
  Fitted f;
  f.pool = random_pool(rng, n, p);
  f.labeled.resize(n);
  std::iota(f.labeled.begin(), f.labeled.end(), 0);
  f.y.resize(n);
  for (int i = 0; i < n; ++i)
    f.y(i) = rng.bernoulli(sigmoid(0.4 * f.pool(i, 0) - 0.8 * f.pool(i, 1)));
  std::vector<int> vars(k_active);
  std::iota(vars.begin(), vars.end(), 0);
  std::tie(f.model, std::ignore) =
      fit_irls(gather(f.pool, f.labeled, vars), f.y, vars, Eigen::VectorXd());
  f.probs.resize(n);
  for (int i = 0; i < n; ++i)
    f.probs(i) = predict_prob_row(f.model, f.pool, f.labeled[i]);
  for (int j = k_active; j < p; ++j) f.inactive.push_back(j);
  return f;
}

}  // namespace

TEST_CASE("zero residuals give zero scores") {
  Rng rng(201);
  const Eigen::MatrixXd pool = random_pool(rng, 10, 4);
  std::vector<int> labeled(10);
  std::iota(labeled.begin(), labeled.end(), 0);
  Eigen::VectorXd y(10), probs(10);
  for (int i = 0; i < 10; ++i) {
    y(i) = i % 2;
    probs(i) = y(i);
  }
  const auto scores = gradient_scores(pool, labeled, probs, y, {2, 3});
  for (const auto& s : scores) CHECK(s.g == 0.0);
}

TEST_CASE("a constant column scores the absolute residual sum") {
  Rng rng(203);
  Eigen::MatrixXd pool = random_pool(rng, 12, 3);
  pool.col(2).setOnes();
  std::vector<int> labeled(12);
  std::iota(labeled.begin(), labeled.end(), 0);
  Eigen::VectorXd y(12), probs(12);
  double expected = 0.0;
  for (int i = 0; i < 12; ++i) {
    y(i) = i % 2;
    probs(i) = rng.uniform01();
    expected += y(i) - probs(i);
  }
  const auto scores = gradient_scores(pool, labeled, probs, y, {2});
  CHECK(scores.size() == 1);
  CHECK(scores[0].var_index == 2);
  CHECK(scores[0].g == doctest::Approx(std::abs(expected)).epsilon(1e-12));
}

TEST_CASE("scores match central finite differences of the log-likelihood") {
  Rng rng(207);
  for (int trial = 0; trial < 10; ++trial) {
    const auto f = fitted_instance(rng, 40, 6, 2);
    const auto scores =
        gradient_scores(f.pool, f.labeled, f.probs, f.y, f.inactive);

    for (const auto& s : scores) {
      // d/d beta_u of the log-likelihood at beta_u = 0, model extended by u.
      std::vector<int> vars = f.model.active_vars;
      vars.push_back(s.var_index);
      LogisticModel ext;
      ext.active_vars = vars;
      ext.beta = Eigen::VectorXd::Zero(vars.size());
      ext.beta.head(f.model.beta.size()) = f.model.beta;
      const Eigen::MatrixXd x_ext = gather(f.pool, f.labeled, vars);

      const double step = 1e-6;
      ext.beta(vars.size() - 1) = step;
      const double up = log_likelihood(ext, x_ext, f.y);
      ext.beta(vars.size() - 1) = -step;
      const double dn = log_likelihood(ext, x_ext, f.y);
      const double fd = std::abs((up - dn) / (2.0 * step));
      CHECK(s.g == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("scores equal the analytic gradient coordinate at zero") {
  Rng rng(209);
  const auto f = fitted_instance(rng, 35, 5, 2);
  const auto scores = gradient_scores(f.pool, f.labeled, f.probs, f.y, f.inactive);
  for (const auto& s : scores) {
    std::vector<int> vars = f.model.active_vars;
    vars.push_back(s.var_index);
    Eigen::VectorXd beta_ext = Eigen::VectorXd::Zero(vars.size());
    beta_ext.head(f.model.beta.size()) = f.model.beta;
    const Eigen::VectorXd g =
        loglik_gradient(gather(f.pool, f.labeled, vars), f.y, beta_ext);
    CHECK(std::abs(s.g - std::abs(g(vars.size() - 1))) <= 1e-10);
  }
}

TEST_CASE("scores are invariant to labeled-row permutation") {
  Rng rng(211);
  const auto f = fitted_instance(rng, 30, 5, 2);
  const auto base = gradient_scores(f.pool, f.labeled, f.probs, f.y, f.inactive);

  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  perm = rng.take(std::move(perm), 30);
  std::vector<int> labeled_p(30);
  Eigen::VectorXd probs_p(30), y_p(30);
  for (int i = 0; i < 30; ++i) {
    labeled_p[i] = f.labeled[perm[i]];
    probs_p(i) = f.probs(perm[i]);
    y_p(i) = f.y(perm[i]);
  }
  const auto permuted =
      gradient_scores(f.pool, labeled_p, probs_p, y_p, f.inactive);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i].g == doctest::Approx(permuted[i].g).epsilon(1e-12));
}

TEST_CASE("scaling a column scales its score linearly") {
  Rng rng(213);
  auto f = fitted_instance(rng, 30, 5, 2);
  const auto base = gradient_scores(f.pool, f.labeled, f.probs, f.y, {3});
  f.pool.col(3) *= 2.0;
  const auto doubled = gradient_scores(f.pool, f.labeled, f.probs, f.y, {3});
  CHECK(doubled[0].g == doctest::Approx(2.0 * base[0].g).epsilon(1e-12));
}

TEST_CASE("select_variable: singleton, tie-break, and max scan") {
  CHECK(select_variable({{7, 0.3}}) == 7);
  CHECK(select_variable({{2, 0.3}, {5, 0.9}, {7, 0.9}}) == 5);
  CHECK_THROWS_AS(select_variable({}), EmptyInactiveSet);

  Rng rng(217);
  std::vector<VariableScore> scores;
  for (int j = 0; j < 100; ++j) scores.push_back({j, rng.uniform01()});
  int best = 0;
  for (int j = 1; j < 100; ++j)
    if (scores[j].g > scores[best].g) best = j;
  CHECK(select_variable(scores) == best);
}

TEST_CASE("stop decision arithmetic") {
  const auto same = make_stop_decision(2.0, 2.0, 1e-2);
  CHECK(same.crit == 0.0);
  CHECK_FALSE(same.accept);

  const auto halved = make_stop_decision(2.0, 1.0, 1e-2);
  CHECK(halved.crit == doctest::Approx(0.5));
  CHECK(halved.accept);

  // Boundary: crit exactly epsilon continues (stop rule is crit < epsilon).
  const auto edge = make_stop_decision(2.0, 2.02, 1e-2);
  CHECK(edge.crit == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(edge.accept);

  CHECK_THROWS(make_stop_decision(0.0, 1.0, 1e-2));
}

TEST_CASE("evaluate_stop computes both normalized determinants on one design") {
  Rng rng(223);
  Eigen::MatrixXd pool = random_pool(rng, 60, 5);
  std::vector<int> labeled(60);
  std::iota(labeled.begin(), labeled.end(), 0);
  Eigen::VectorXd y(60);
  for (int i = 0; i < 60; ++i)
    y(i) = rng.bernoulli(sigmoid(0.5 - 1.2 * pool(i, 1) + 0.8 * pool(i, 2)));

  auto [model, rep] = fit_irls(gather(pool, labeled, {0, 1}), y, {0, 1},
                               Eigen::VectorXd());
  const DesignState state = make_design_state(pool, labeled, model);
  REQUIRE_FALSE(state.singular());

  const auto eval = evaluate_stop(state, 2, pool, y, 1e-2, {});
  CHECK(eval.model.active_vars == std::vector<int>{0, 1, 2});
  CHECK(eval.model.beta.size() == 3);
  CHECK_FALSE(eval.singular_augmented);

  // Independent recomputation of both sides from the definitions.
  const double m0 = std::exp(cholesky(state.info)->log_det / 2.0);
  const SymMatrix info1 =
      information_matrix(gather(pool, labeled, {0, 1, 2}), eval.model);
  const double m1 = std::exp(cholesky(info1)->log_det / 3.0);
  CHECK(eval.decision.m0 == doctest::Approx(m0).epsilon(1e-12));
  CHECK(eval.decision.m1 == doctest::Approx(m1).epsilon(1e-10));
  CHECK(eval.decision.crit ==
        doctest::Approx(std::abs(m1 - m0) / m0).epsilon(1e-10));
  CHECK(eval.decision.accept == (eval.decision.crit >= 1e-2));

  // The labeled set is shared by both designs.
  CHECK(eval.state.labeled == state.labeled);
}

TEST_CASE("duplicating an active column is a singular augmentation") {
  Rng rng(227);
  Eigen::MatrixXd pool = random_pool(rng, 40, 4);
  pool.col(3) = pool.col(1);  // candidate identical to an active column
  std::vector<int> labeled(40);
  std::iota(labeled.begin(), labeled.end(), 0);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i)
    y(i) = rng.bernoulli(sigmoid(0.3 - 0.9 * pool(i, 1)));

  auto [model, rep] = fit_irls(gather(pool, labeled, {0, 1}), y, {0, 1},
                               Eigen::VectorXd());
  const DesignState state = make_design_state(pool, labeled, model);
  REQUIRE_FALSE(state.singular());

  const auto eval = evaluate_stop(state, 3, pool, y, 1e-2, {});
  CHECK(eval.singular_augmented);
  CHECK_FALSE(eval.decision.accept);
  CHECK(eval.decision.m1 == 0.0);
  CHECK(eval.decision.crit == 0.0);
}

TEST_CASE("evaluate_stop validates its preconditions") {
  Rng rng(229);
  Eigen::MatrixXd pool = random_pool(rng, 20, 3);
  std::vector<int> labeled(20);
  std::iota(labeled.begin(), labeled.end(), 0);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) y(i) = i % 2;
  auto [model, rep] =
      fit_irls(gather(pool, labeled, {0, 1}), y, {0, 1}, Eigen::VectorXd());
  const DesignState state = make_design_state(pool, labeled, model);
  CHECK_THROWS(evaluate_stop(state, 1, pool, y, 1e-2, {}));  // already active
}
