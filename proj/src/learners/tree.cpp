#include "ccr/learners/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccr/error.hpp"

namespace ccr {

double gini(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) throw Error("empty-node", "gini of an empty node");
  double sum_sq = 0.0;
  for (double c : counts) {
    const double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double split_gain(std::span<const double> parent, std::span<const double> left,
                  std::span<const double> right) {
  if (parent.size() != left.size() || parent.size() != right.size())
    throw Error("inconsistent-counts", "class count arity mismatch");
  double n_parent = 0.0, n_left = 0.0, n_right = 0.0;
  for (std::size_t c = 0; c < parent.size(); ++c) {
    if (left[c] + right[c] != parent[c])
      throw Error("inconsistent-counts", "left + right != parent");
    n_parent += parent[c];
    n_left += left[c];
    n_right += right[c];
  }
  if (n_parent <= 0.0) throw Error("empty-node", "split of an empty node");
  double gain = gini(parent);
  if (n_left > 0.0) gain -= (n_left / n_parent) * gini(left);
  if (n_right > 0.0) gain -= (n_right / n_parent) * gini(right);
  return gain;
}

// ---------------------------------------------------------------- RF trees

namespace {

struct ClassSplit {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

double binary_gini(double pos, double total) {
  const double p = pos / total;
  const double q = 1.0 - p;
  return 1.0 - p * p - q * q;
}

struct ClassBuilder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const ClassTreeParams& params;
  Rng& rng;
  std::vector<TreeNode> nodes;
  Eigen::VectorXd importance;

  int grow(std::vector<std::size_t>& rows, int depth) {
    double pos = 0.0;
    for (std::size_t r : rows) pos += y(static_cast<Eigen::Index>(r));
    const double total = static_cast<double>(rows.size());

    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(id)].value = pos / total;

    const bool pure = pos == 0.0 || pos == total;
    if (depth >= params.max_depth || pure ||
        rows.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
      return id;
    }

    const ClassSplit best = find_split(rows, pos, total);
    if (best.feature < 0 || best.gain <= 0.0) return id;

    importance(best.feature) += best.gain;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (std::size_t r : rows)
      (X(static_cast<Eigen::Index>(r), best.feature) < best.threshold ? left_rows : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int left = grow(left_rows, depth + 1);
    const int right = grow(right_rows, depth + 1);
    TreeNode& node = nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  ClassSplit find_split(const std::vector<std::size_t>& rows, double pos, double total) {
    const auto n_features = static_cast<std::size_t>(X.cols());
    std::size_t p = params.feature_subset > 0 ? static_cast<std::size_t>(params.feature_subset)
                                              : n_features;
    p = std::min(p, n_features);
    auto subset = rng.sample_without_replacement(n_features, p);
    std::sort(subset.begin(), subset.end());  // gain ties break toward the lowest index

    const double parent_gini = binary_gini(pos, total);
    ClassSplit best;

    std::vector<std::pair<double, double>> cells;  // (value, label)
    cells.reserve(rows.size());
    for (std::size_t f : subset) {
      cells.clear();
      for (std::size_t r : rows)
        cells.emplace_back(X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)),
                           y(static_cast<Eigen::Index>(r)));
      std::sort(cells.begin(), cells.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      double left_pos = 0.0;
      double left_n = 0.0;
      for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
        left_pos += cells[i].second;
        left_n += 1.0;
        if (cells[i + 1].first == cells[i].first) continue;
        const double right_n = total - left_n;
        if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
        const double right_pos = pos - left_pos;
        const double gain = parent_gini - (left_n / total) * binary_gini(left_pos, left_n) -
                            (right_n / total) * binary_gini(right_pos, right_n);
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (cells[i].first + cells[i + 1].first);
        }
      }
    }
    return best;
  }
};

}  // namespace

ClassTreeResult build_classification_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                          std::span<const std::size_t> sample_rows,
                                          const ClassTreeParams& params, Rng& rng) {
  if (sample_rows.empty()) throw Error("empty-node", "no rows to grow a tree on");
  ClassBuilder builder{X, y, params, rng, {}, Eigen::VectorXd::Zero(X.cols())};
  std::vector<std::size_t> rows(sample_rows.begin(), sample_rows.end());
  builder.grow(rows, 0);
  return ClassTreeResult{Tree{std::move(builder.nodes)}, std::move(builder.importance)};
}

// ----------------------------------------------------------- boosted trees

FeaturePresort FeaturePresort::build(const Eigen::MatrixXd& X) {
  FeaturePresort presort;
  presort.order.resize(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    auto& ord = presort.order[static_cast<std::size_t>(j)];
    ord.resize(static_cast<std::size_t>(X.rows()));
    std::iota(ord.begin(), ord.end(), 0u);
    const auto* col = X.col(j).data();
    std::sort(ord.begin(), ord.end(), [col](std::uint32_t a, std::uint32_t b) {
      return col[a] != col[b] ? col[a] < col[b] : a < b;
    });
  }
  return presort;
}

namespace {

struct RegNodeState {
  double sum_g = 0.0;
  double sum_h = 0.0;
  int tree_node = -1;
  int depth = 0;
  // best split found at the current level
  double best_gain = 0.0;
  int best_feature = -1;
  double best_threshold = 0.0;
  double best_left_g = 0.0;
  double best_left_h = 0.0;
};

double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace

RegTreeResult build_regression_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& grad,
                                    const Eigen::VectorXd& hess, const FeaturePresort& presort,
                                    const RegTreeParams& params) {
  const auto n_rows = static_cast<std::size_t>(X.rows());
  RegTreeResult result;
  result.gain = Eigen::VectorXd::Zero(X.cols());

  std::vector<TreeNode> nodes(1);
  std::vector<std::int32_t> node_of_row(n_rows, 0);

  std::vector<RegNodeState> level(1);
  level[0].tree_node = 0;
  level[0].depth = 0;
  level[0].sum_g = grad.sum();
  level[0].sum_h = hess.sum();

  // slot_of_node[t] is the index into `level` for tree node t, or -1.
  std::vector<std::int32_t> slot_of_node(1, 0);

  while (!level.empty()) {
    const bool can_split = level.front().depth < params.max_depth;
    if (can_split) {
      struct Acc {
        double g = 0.0, h = 0.0;
        double prev = 0.0;
        bool started = false;
      };
      std::vector<Acc> acc(level.size());

      for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (auto& a : acc) a = Acc{};
        const auto* col = X.col(j).data();
        for (std::uint32_t row : presort.order[static_cast<std::size_t>(j)]) {
          const std::int32_t slot = slot_of_node[static_cast<std::size_t>(node_of_row[row])];
          if (slot < 0) continue;
          RegNodeState& node = level[static_cast<std::size_t>(slot)];
          Acc& a = acc[static_cast<std::size_t>(slot)];
          const double v = col[row];
          if (a.started && v != a.prev) {
            const double h_left = a.h;
            const double h_right = node.sum_h - a.h;
            if (h_left >= params.min_child_weight && h_right >= params.min_child_weight) {
              const double g_left = a.g;
              const double g_right = node.sum_g - a.g;
              const double gain =
                  0.5 * (leaf_objective(g_left, h_left, params.leaf_penalty) +
                         leaf_objective(g_right, h_right, params.leaf_penalty) -
                         leaf_objective(node.sum_g, node.sum_h, params.leaf_penalty)) -
                  params.split_penalty;
              if (gain > node.best_gain) {
                node.best_gain = gain;
                node.best_feature = static_cast<int>(j);
                node.best_threshold = 0.5 * (a.prev + v);
                node.best_left_g = g_left;
                node.best_left_h = h_left;
              }
            }
          }
          a.g += grad(row);
          a.h += hess(row);
          a.prev = v;
          a.started = true;
        }
      }
    }

    // Apply the accepted splits, finalize the rest as leaves.
    std::vector<RegNodeState> next;
    for (auto& s : slot_of_node) s = -1;
    for (RegNodeState& node : level) {
      TreeNode& tn = nodes[static_cast<std::size_t>(node.tree_node)];
      if (can_split && node.best_feature >= 0 && node.best_gain > 0.0) {
        result.gain(node.best_feature) += node.best_gain;
        result.has_split = true;
        tn.feature = node.best_feature;
        tn.threshold = node.best_threshold;
        tn.left = static_cast<int>(nodes.size());
        tn.right = tn.left + 1;
        nodes.emplace_back();
        nodes.emplace_back();
        slot_of_node.resize(nodes.size(), -1);

        RegNodeState left;
        left.tree_node = tn.left;
        left.depth = node.depth + 1;
        left.sum_g = node.best_left_g;
        left.sum_h = node.best_left_h;
        RegNodeState right;
        right.tree_node = tn.right;
        right.depth = node.depth + 1;
        right.sum_g = node.sum_g - node.best_left_g;
        right.sum_h = node.sum_h - node.best_left_h;

        slot_of_node[static_cast<std::size_t>(tn.left)] = static_cast<std::int32_t>(next.size());
        next.push_back(left);
        slot_of_node[static_cast<std::size_t>(tn.right)] = static_cast<std::int32_t>(next.size());
        next.push_back(right);
      } else {
        tn.feature = -1;
        tn.value = -node.sum_g / (node.sum_h + params.leaf_penalty);
      }
    }

    if (!next.empty()) {
      for (std::size_t r = 0; r < n_rows; ++r) {
        const TreeNode& tn = nodes[static_cast<std::size_t>(node_of_row[r])];
        if (tn.is_leaf()) continue;
        node_of_row[r] = X(static_cast<Eigen::Index>(r), tn.feature) < tn.threshold
                             ? tn.left
                             : tn.right;
      }
    }
    level = std::move(next);
  }

  result.tree = Tree{std::move(nodes)};
  return result;
}

}  // namespace ccr
