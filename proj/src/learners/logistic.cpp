#include "ccr/learners/logistic.hpp"

#include <algorithm>
#include <cmath>

#include "ccr/error.hpp"

namespace ccr {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

namespace {

// log(1 + exp(-m)) evaluated stably; logistic loss is log1pexp(-y_signed * z).
double log1pexp(double z) {
  if (z > 0.0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

double mean_logloss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double intercept) {
  const Eigen::VectorXd z = (X * w).array() + intercept;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // ell = -y log p - (1-y) log(1-p) = log1pexp(z) - y z
    total += log1pexp(z(i)) - y(i) * z(i);
  }
  return total / static_cast<double>(z.size());
}

void logloss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  double intercept, Eigen::VectorXd& grad_w, double& grad_intercept) {
  const Eigen::VectorXd p = sigmoid(Eigen::VectorXd((X * w).array() + intercept));
  const Eigen::VectorXd residual = p - y;
  const double inv_m = 1.0 / static_cast<double>(X.rows());
  grad_w = inv_m * (X.transpose() * residual);
  grad_intercept = inv_m * residual.sum();
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

void require_two_classes(const Eigen::VectorXd& y) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class-labels", "training labels are all one class");
}

}  // namespace

double lr_loss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double intercept, double l2, Eigen::VectorXd& grad_w, double& grad_intercept) {
  logloss_grad(X, y, w, intercept, grad_w, grad_intercept);
  grad_w += 2.0 * l2 * w;
  return mean_logloss(X, y, w, intercept) + l2 * w.squaredNorm();
}

ModelArtifact train_lr(const Dataset& train, const LrConfig& config) {
  LearnerConfig cfg{Family::LR, config};
  cfg.validate();
  require_two_classes(train.y);

  const Eigen::Index n = train.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  double intercept = 0.0;

  // Stage 1: ISTA with backtracking on the smooth part, soft-threshold prox.
  double step = 1.0;
  Eigen::VectorXd grad_w(n);
  double grad_b = 0.0;
  bool stage1_converged = false;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    const double f = mean_logloss(train.X, train.y, w, intercept);
    logloss_grad(train.X, train.y, w, intercept, grad_w, grad_b);

    Eigen::VectorXd w_next(n);
    double b_next = 0.0;
    for (;;) {
      for (Eigen::Index j = 0; j < n; ++j)
        w_next(j) = soft_threshold(w(j) - step * grad_w(j), step * config.l1);
      b_next = intercept - step * grad_b;
      const Eigen::VectorXd dw = w_next - w;
      const double db = b_next - intercept;
      const double f_next = mean_logloss(train.X, train.y, w_next, b_next);
      const double bound = f + grad_w.dot(dw) + grad_b * db +
                           (dw.squaredNorm() + db * db) / (2.0 * step);
      if (f_next <= bound + 1e-12 || step < 1e-12) break;
      step *= 0.5;
    }

    const double residual =
        std::sqrt((w_next - w).squaredNorm() + (b_next - intercept) * (b_next - intercept)) / step;
    w = std::move(w_next);
    intercept = b_next;
    if (residual < config.tol) {
      stage1_converged = true;
      break;
    }
  }

  std::vector<int> active;
  for (Eigen::Index j = 0; j < n; ++j)
    if (w(j) != 0.0) active.push_back(static_cast<int>(j));

  // Stage 2: plain gradient descent with line halving on the survivors.
  Eigen::MatrixXd Xa(train.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k)
    Xa.col(static_cast<Eigen::Index>(k)) = train.X.col(active[k]);

  Eigen::VectorXd wa(static_cast<Eigen::Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) wa(static_cast<Eigen::Index>(k)) = w(active[k]);

  Eigen::VectorXd grad_a(wa.size());
  double grad_norm = 0.0;
  bool stage2_converged = false;
  for (int iter = 0; iter < config.max_iters; ++iter) {
    const double f = lr_loss_grad(Xa, train.y, wa, intercept, config.l2, grad_a, grad_b);
    grad_norm = std::sqrt(grad_a.squaredNorm() + grad_b * grad_b);
    if (grad_norm < config.tol) {
      stage2_converged = true;
      break;
    }
    double s = 1.0;
    for (;;) {
      const Eigen::VectorXd wa_next = wa - s * grad_a;
      const double b_next = intercept - s * grad_b;
      const double f_next =
          mean_logloss(Xa, train.y, wa_next, b_next) + config.l2 * wa_next.squaredNorm();
      if (f_next < f || s < 1e-12) {
        wa = wa_next;
        intercept = b_next;
        break;
      }
      s *= 0.5;
    }
  }

  LogisticModel model;
  model.weights = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < active.size(); ++k)
    model.weights(active[k]) = wa(static_cast<Eigen::Index>(k));
  model.intercept = intercept;
  model.active = std::move(active);
  model.final_grad_norm = grad_norm;

  ModelArtifact artifact;
  artifact.family = Family::LR;
  artifact.config = cfg;
  artifact.model = std::move(model);
  artifact.converged = stage1_converged && stage2_converged;
  artifact.provenance.rows = train.rows();
  artifact.provenance.bad_rate = train.bad_rate();
  artifact.provenance.feature_names = train.feature_names;
  return artifact;
}

}  // namespace ccr
