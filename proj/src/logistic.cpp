#include "gate/logistic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gate/linalg.hpp"

namespace gate {

namespace {

// log(sigmoid(eta)) without overflow for any finite eta.
double log_sigmoid(double eta) {
  if (eta >= 0.0) return -std::log1p(std::exp(-eta));
  return eta - std::log1p(std::exp(eta));
}

void check_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0.0 && y(i) != 1.0)
      throw NonBinaryLabel("labels must be exactly 0 or 1");
  }
}

}  // namespace

double sigmoid(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

// Keeps predictions strictly inside (0,1) where the sigmoid itself rounds to
// an endpoint (|eta| beyond ~37).
double open_unit(double p) {
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  return std::clamp(p, lo, hi);
}

}  // namespace

double predict_prob(const LogisticModel& model, const Eigen::VectorXd& x_active) {
  if (x_active.size() != model.beta.size())
    throw DimensionMismatch("predict_prob: x not aligned with active variables");
  return open_unit(sigmoid(model.beta.dot(x_active)));
}

double predict_prob_row(const LogisticModel& model, const Eigen::MatrixXd& x_pool,
                        int row) {
  double eta = 0.0;
  for (std::size_t j = 0; j < model.active_vars.size(); ++j)
    eta += model.beta(static_cast<Eigen::Index>(j)) * x_pool(row, model.active_vars[j]);
  return open_unit(sigmoid(eta));
}

int classify(const LogisticModel& model, const Eigen::VectorXd& x_active) {
  return predict_prob(model, x_active) > model.alpha ? 1 : 0;
}

double log_likelihood(const LogisticModel& model, const Eigen::MatrixXd& x,
                      const Eigen::VectorXd& y) {
  if (x.rows() != y.size())
    throw DimensionMismatch("log_likelihood: row count mismatch");
  if (x.cols() != model.beta.size())
    throw DimensionMismatch("log_likelihood: column count mismatch");
  check_binary(y);

  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double eta = model.beta.dot(x.row(i));
    const double lp = log_sigmoid(eta);  // log p
    total += y(i) * lp + (1.0 - y(i)) * (lp - eta);  // log(1-p) = log p - eta
  }
  return total;
}

Eigen::VectorXd loglik_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& beta) {
  if (x.rows() != y.size() || x.cols() != beta.size())
    throw DimensionMismatch("loglik_gradient: shape mismatch");
  Eigen::VectorXd p(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) p(i) = sigmoid(beta.dot(x.row(i)));
  return x.transpose() * (y - p);
}

std::pair<LogisticModel, FitReport> fit_irls(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
    std::vector<int> active_vars, const Eigen::VectorXd& init_beta,
    const IrlsControls& controls, double alpha) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (n < 1) throw DimensionMismatch("fit_irls: need at least one row");
  if (k < 1 || static_cast<Eigen::Index>(active_vars.size()) != k)
    throw DimensionMismatch("fit_irls: active variable set does not match x");
  if (y.size() != n) throw DimensionMismatch("fit_irls: label count mismatch");
  check_binary(y);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (init_beta.size() > 0) {
    if (init_beta.size() != k)
      throw DimensionMismatch("fit_irls: init_beta length mismatch");
    beta = init_beta;
  }

  static constexpr std::array<double, 4> kRidgeLadder = {1e-8, 1e-6, 1e-4, 1e-2};
  double lambda = controls.ridge;

  const auto penalized = [&](const Eigen::VectorXd& b) {
    LogisticModel m{active_vars, b, alpha};
    return log_likelihood(m, x, y) - 0.5 * lambda * b.squaredNorm();
  };

  FitReport report;
  for (int iter = 0; iter < controls.max_iter; ++iter) {
    Eigen::VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = sigmoid(beta.dot(x.row(i)));
      w(i) = p(i) * (1.0 - p(i));
    }
    Eigen::VectorXd grad = x.transpose() * (y - p) - lambda * beta;
    if (grad.lpNorm<Eigen::Infinity>() <= controls.tol) {
      report.converged = true;
      break;
    }

    // Weighted Hessian, climbing the ridge ladder when it is not PD.
    std::optional<CholFactor> factor;
    for (;;) {
      Eigen::MatrixXd h = x.transpose() * w.asDiagonal() * x;
      h.diagonal().array() += lambda;
      factor = cholesky(SymMatrix(h));
      if (factor) break;
      if (!controls.ridge_fallback)
        throw SingularSystem("fit_irls: weighted normal equations singular");
      double next = lambda;
      for (double step : kRidgeLadder) {
        if (step > lambda) {
          next = step;
          break;
        }
      }
      if (next == lambda)
        throw SingularSystem("fit_irls: singular after full ridge ladder");
      lambda = next;
      grad = x.transpose() * (y - p) - lambda * beta;
    }

    const Eigen::VectorXd delta = solve(*factor, grad);
    const double q0 = penalized(beta);
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half <= controls.max_halvings; ++half) {
      if (penalized(beta + scale * delta) >= q0) {
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    ++report.iterations;
    if (!improved) break;  // no ascent direction left; keep best iterate

    beta += scale * delta;
    report.max_abs_step = (scale * delta).lpNorm<Eigen::Infinity>();
    if (report.max_abs_step < 1e-14) {
      // Step collapsed to numerical zero; the gradient check decides
      // convergence on the next pass, but there is no progress to make.
      Eigen::VectorXd g2 = loglik_gradient(x, y, beta) - lambda * beta;
      report.converged = g2.lpNorm<Eigen::Infinity>() <= controls.tol;
      break;
    }
  }

  // An interior maximum cannot classify every point strictly correctly: if
  // the final coefficients separate the data perfectly, the likelihood is
  // still increasing along beta and the score equations were met only by
  // saturation, so the fit has not truly converged.
  if (report.converged && lambda == 0.0) {
    bool separated = true;
    for (Eigen::Index i = 0; i < n && separated; ++i) {
      const double margin = (2.0 * y(i) - 1.0) * beta.dot(x.row(i));
      separated = margin > 0.0;
    }
    if (separated) report.converged = false;
  }

  report.ridge_used = lambda;
  LogisticModel model{std::move(active_vars), beta, alpha};
  report.final_loglik = log_likelihood(model, x, y);
  return {std::move(model), report};
}

}  // namespace gate
