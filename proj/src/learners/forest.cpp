#include "ccr/learners/forest.hpp"

#include <cmath>
#include <numeric>

#include "ccr/error.hpp"
#include "ccr/util/parallel.hpp"

namespace ccr {

namespace {

void require_two_classes(const Eigen::VectorXd& y) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0.5 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class-labels", "training labels are all one class");
}

}  // namespace

ModelArtifact train_rf(const Dataset& train, const RfConfig& config, int threads) {
  LearnerConfig cfg{Family::RF, config};
  cfg.validate();
  require_two_classes(train.y);

  const auto n_rows = static_cast<std::size_t>(train.rows());
  ClassTreeParams params;
  params.max_depth = config.max_depth;
  params.min_leaf = config.min_leaf;
  params.feature_subset =
      config.feature_subset > 0
          ? config.feature_subset
          : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(train.cols()))));

  ForestModel model;
  model.trees.resize(static_cast<std::size_t>(config.trees));
  std::vector<Eigen::VectorXd> per_tree_importance(static_cast<std::size_t>(config.trees));

  parallel_for(static_cast<std::size_t>(config.trees), threads, [&](std::size_t k) {
    Rng rng(sub_seed(config.seed, "rf-tree", k));
    std::vector<std::size_t> sample;
    sample.reserve(n_rows);
    if (config.bootstrap) {
      for (std::size_t i = 0; i < n_rows; ++i)
        sample.push_back(static_cast<std::size_t>(rng.below(n_rows)));
    } else {
      sample.resize(n_rows);
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    ClassTreeResult result = build_classification_tree(train.X, train.y, sample, params, rng);
    model.trees[k] = std::move(result.tree);
    per_tree_importance[k] = std::move(result.importance);
  });

  // Importance(j): mean over trees of the summed Gini decreases.
  model.importance = Eigen::VectorXd::Zero(train.cols());
  for (const auto& imp : per_tree_importance) model.importance += imp;
  model.importance /= static_cast<double>(config.trees);

  ModelArtifact artifact;
  artifact.family = Family::RF;
  artifact.config = cfg;
  artifact.model = std::move(model);
  artifact.provenance.rows = train.rows();
  artifact.provenance.bad_rate = train.bad_rate();
  artifact.provenance.feature_names = train.feature_names;
  return artifact;
}

}  // namespace ccr
