#pragma once

#include "ccr/learners/common.hpp"

namespace ccr {

// Feed-forward binary classifier: hidden ReLU stack, sigmoid output, binary
// cross-entropy loss, Adam updates, inverted dropout on the configured hidden
// layers during training only. Errors: single-class-labels; divergence when
// the loss goes non-finite (the failing epoch is named).
ModelArtifact train_mlp(const Dataset& train, const MlpConfig& config);

// Deterministic forward pass (no dropout); raw probabilities, unclamped.
Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::MatrixXd& X);

// Mean BCE loss and analytic gradients with dropout disabled. Exposed for
// finite-difference checks.
double mlp_loss_grad(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     std::vector<Eigen::MatrixXd>& grad_w, std::vector<Eigen::VectorXd>& grad_b);

// Seeded scaled-uniform fan-in initialization (biases zero).
MlpModel mlp_init(const MlpConfig& config, Eigen::Index n_features);

std::size_t mlp_param_count(const MlpConfig& config, Eigen::Index n_features);

}  // namespace ccr
