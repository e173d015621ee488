#include "ccr/learners/boosting.hpp"

#include <cmath>

#include "ccr/error.hpp"
#include "ccr/learners/logistic.hpp"

namespace ccr {

namespace {

void require_two_classes(const Eigen::VectorXd& y) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class-labels", "training labels are all one class");
}

double sum_logloss(const Eigen::VectorXd& raw, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    const double z = raw(i);
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - y(i) * z;
  }
  return total;
}

}  // namespace

ModelArtifact train_gbt(const Dataset& train, const GbtConfig& config,
                        GbtDiagnostics* diagnostics) {
  LearnerConfig cfg{Family::GBT, config};
  cfg.validate();
  require_two_classes(train.y);

  const double bad_rate = train.bad_rate();
  BoostedModel model;
  model.base_score = std::log(bad_rate / (1.0 - bad_rate));
  model.learning_rate = config.learning_rate;
  model.importance = Eigen::VectorXd::Zero(train.cols());

  const FeaturePresort presort = FeaturePresort::build(train.X);
  RegTreeParams params;
  params.max_depth = config.max_depth;
  params.min_child_weight = config.min_child_weight;
  params.leaf_penalty = config.leaf_penalty;
  params.split_penalty = config.split_penalty;

  Eigen::VectorXd raw = Eigen::VectorXd::Constant(train.rows(), model.base_score);
  Eigen::VectorXd grad(train.rows());
  Eigen::VectorXd hess(train.rows());
  double omega = 0.0;

  for (int round = 0; round < config.rounds; ++round) {
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      const double p = sigmoid(raw(i));
      grad(i) = p - train.y(i);
      hess(i) = p * (1.0 - p);
    }

    RegTreeResult result = build_regression_tree(train.X, grad, hess, presort, params);
    if (!result.has_split) {
      if (diagnostics) {
        ++diagnostics->dropped_rounds;
        diagnostics->objective.push_back(sum_logloss(raw, train.y) + omega);
      }
      continue;
    }

    model.importance += result.gain;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
      raw(i) += config.learning_rate * result.tree.predict_row(train.X.row(i));

    if (diagnostics) {
      int leaves = 0;
      double weight_sq = 0.0;
      for (const TreeNode& node : result.tree.nodes) {
        if (node.is_leaf()) {
          ++leaves;
          const double applied = config.learning_rate * node.value;
          weight_sq += applied * applied;
        }
      }
      omega += config.split_penalty * leaves + 0.5 * config.leaf_penalty * weight_sq;
      diagnostics->objective.push_back(sum_logloss(raw, train.y) + omega);
    }
    model.trees.push_back(std::move(result.tree));
  }

  ModelArtifact artifact;
  artifact.family = Family::GBT;
  artifact.config = cfg;
  artifact.model = std::move(model);
  artifact.provenance.rows = train.rows();
  artifact.provenance.bad_rate = bad_rate;
  artifact.provenance.feature_names = train.feature_names;
  return artifact;
}

}  // namespace ccr
