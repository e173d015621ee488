#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "ccr/rng.hpp"

namespace ccr {

// G(S) = 1 - sum_c p_c^2. Error: empty-node.
double gini(std::span<const double> counts);

// G(parent) - |L|/|P| G(L) - |R|/|P| G(R). Error: inconsistent-counts
// unless left + right == parent elementwise.
double split_gain(std::span<const double> parent, std::span<const double> left,
                  std::span<const double> right);

struct TreeNode {
  int feature = -1;         // -1 marks a leaf
  double threshold = 0.0;   // rows with x(feature) < threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;       // leaf payload

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root; empty tree predicts 0

  bool empty() const { return nodes.empty(); }

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (nodes.empty()) return 0.0;
    int n = 0;
    while (!nodes[static_cast<std::size_t>(n)].is_leaf()) {
      const TreeNode& node = nodes[static_cast<std::size_t>(n)];
      n = row(node.feature) < node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(n)].value;
  }
};

// ---- classification (Gini) trees, used by the random forest ----

struct ClassTreeParams {
  int max_depth = 8;
  int min_leaf = 1;        // both children must keep at least this many rows
  int feature_subset = 0;  // p features sampled per split; 0 means all
};

struct ClassTreeResult {
  Tree tree;
  Eigen::VectorXd importance;  // per-feature sum of Gini decreases
};

// Greedy CART on the given sample rows (duplicates allowed, e.g. bootstrap).
// Thresholds are midpoints between consecutive distinct sorted values; ties in
// gain break toward the lowest feature index, then the lowest threshold.
// Feature subsets are drawn per split from `rng`.
ClassTreeResult build_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          std::span<const std::size_t> sample_rows,
                                          const ClassTreeParams& params, Rng& rng);

// ---- second-order regression trees, used by gradient boosting ----

// Row orderings per feature, built once per training matrix and shared
// across boosting rounds.
struct FeaturePresort {
  std::vector<std::vector<std::uint32_t>> order;  // per feature, rows sorted ascending

  static FeaturePresort build(const Eigen::MatrixXd& X);
};

struct RegTreeParams {
  int max_depth = 3;
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double leaf_penalty = 1.0;      // lambda
  double split_penalty = 0.0;     // gamma
};

struct RegTreeResult {
  Tree tree;                   // leaf values are the unshrunk weights -G/(H+lambda)
  Eigen::VectorXd gain;        // per-feature total accepted split gain
  bool has_split = false;      // false when the root found no positive-gain split
};

// Exact greedy tree on gradient/hessian pairs; gain
//   1/2 [ G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l) ] - gamma
// with splits of non-positive gain rejected.
RegTreeResult build_regression_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
                                    const Eigen::VectorXd& hess, const FeaturePresort& presort,
                                    const RegTreeParams& params);

}  // namespace ccr
