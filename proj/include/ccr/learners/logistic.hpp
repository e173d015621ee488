#pragma once

#include "ccr/learners/common.hpp"

namespace ccr {

// Two-stage penalized logistic regression: an L1 proximal-gradient pass for
// feature selection, then an L2 gradient-descent refit on the survivors.
// The intercept is never penalized. Error: single-class-labels;
// non-convergence returns the artifact flagged, never throws.
ModelArtifact train_lr(const Dataset& train, const LrConfig& config);

// Mean logistic loss plus l2 * ||w||^2 over the active features, and its
// analytic gradient. Exposed for finite-difference checks.
double lr_loss_grad(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double intercept, double l2, Eigen::VectorXd& grad_w, double& grad_intercept);

double sigmoid(double z);
Eigen::VectorXd sigmoid(const Eigen::VectorXd& z);

}  // namespace ccr
