#include "ccr/learners/common.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

#include "ccr/error.hpp"
#include "ccr/hash.hpp"
#include "ccr/learners/boosting.hpp"
#include "ccr/learners/forest.hpp"
#include "ccr/learners/logistic.hpp"
#include "ccr/learners/mlp.hpp"

namespace ccr {

using nlohmann::json;

const char* to_string(Family f) {
  switch (f) {
    case Family::LR: return "lr";
    case Family::RF: return "rf";
    case Family::GBT: return "gbt";
    case Family::MLP: return "mlp";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "lr") return Family::LR;
  if (s == "rf") return Family::RF;
  if (s == "gbt") return Family::GBT;
  if (s == "mlp") return Family::MLP;
  throw Error("invalid-config", "unknown family '" + s + "'");
}

LearnerConfig LearnerConfig::defaults(Family family) {
  switch (family) {
    case Family::LR: return {family, LrConfig{}};
    case Family::RF: return {family, RfConfig{}};
    case Family::GBT: return {family, GbtConfig{}};
    case Family::MLP: return {family, MlpConfig{}};
  }
  throw Error("invalid-config", "bad family");
}

void LearnerConfig::validate() const {
  switch (family) {
    case Family::LR: {
      const auto& c = lr();
      if (c.l1 < 0.0 || c.l2 < 0.0) throw Error("invalid-config", "penalty strengths must be >= 0");
      if (c.max_iters < 1) throw Error("invalid-config", "max_iters must be >= 1");
      if (c.tol <= 0.0) throw Error("invalid-config", "tol must be > 0");
      break;
    }
    case Family::RF: {
      const auto& c = rf();
      if (c.trees < 1) throw Error("invalid-config", "K must be >= 1");
      if (c.max_depth < 0) throw Error("invalid-config", "max_depth must be >= 0");
      if (c.min_leaf < 1) throw Error("invalid-config", "min_leaf must be >= 1");
      if (c.feature_subset < 0) throw Error("invalid-config", "feature subset must be >= 0");
      break;
    }
    case Family::GBT: {
      const auto& c = gbt();
      if (c.rounds < 1) throw Error("invalid-config", "K must be >= 1");
      if (c.learning_rate < 0.0 || c.learning_rate > 1.0)
        throw Error("invalid-config", "learning rate must lie in [0,1]");
      if (c.leaf_penalty < 0.0 || c.split_penalty < 0.0)
        throw Error("invalid-config", "penalties must be >= 0");
      if (c.max_depth < 0) throw Error("invalid-config", "max_depth must be >= 0");
      if (c.min_child_weight < 0.0) throw Error("invalid-config", "min_child_weight must be >= 0");
      break;
    }
    case Family::MLP: {
      const auto& c = mlp();
      if (c.hidden.empty()) throw Error("invalid-config", "at least one hidden layer required");
      for (int w : c.hidden)
        if (w < 1) throw Error("invalid-config", "hidden widths must be >= 1");
      if (c.dropout < 0.0 || c.dropout >= 1.0)
        throw Error("invalid-config", "dropout must lie in [0,1)");
      if (c.epochs < 0) throw Error("invalid-config", "epochs must be >= 0");
      if (c.batch < 1) throw Error("invalid-config", "batch must be >= 1");
      if (c.adam_step <= 0.0) throw Error("invalid-config", "adam step must be > 0");
      break;
    }
  }
}

// ------------------------------------------------------------- config JSON

json LearnerConfig::to_json() const {
  json j{{"family", to_string(family)}};
  switch (family) {
    case Family::LR: {
      const auto& c = lr();
      j["l1"] = c.l1;
      j["l2"] = c.l2;
      j["max_iters"] = c.max_iters;
      j["tol"] = c.tol;
      break;
    }
    case Family::RF: {
      const auto& c = rf();
      j["trees"] = c.trees;
      j["max_depth"] = c.max_depth;
      j["feature_subset"] = c.feature_subset;
      j["min_leaf"] = c.min_leaf;
      j["bootstrap"] = c.bootstrap;
      j["seed"] = c.seed;
      break;
    }
    case Family::GBT: {
      const auto& c = gbt();
      j["rounds"] = c.rounds;
      j["learning_rate"] = c.learning_rate;
      j["leaf_penalty"] = c.leaf_penalty;
      j["split_penalty"] = c.split_penalty;
      j["max_depth"] = c.max_depth;
      j["min_child_weight"] = c.min_child_weight;
      break;
    }
    case Family::MLP: {
      const auto& c = mlp();
      j["hidden"] = c.hidden;
      j["dropout"] = c.dropout;
      j["dropout_layers"] = c.dropout_layers;
      j["adam_step"] = c.adam_step;
      j["beta1"] = c.beta1;
      j["beta2"] = c.beta2;
      j["epsilon"] = c.epsilon;
      j["epochs"] = c.epochs;
      j["batch"] = c.batch;
      j["seed"] = c.seed;
      break;
    }
  }
  return j;
}

LearnerConfig LearnerConfig::from_json(const json& j) {
  const Family family = family_from_string(j.at("family").get<std::string>());
  LearnerConfig cfg = defaults(family);
  switch (family) {
    case Family::LR: {
      LrConfig c;
      c.l1 = j.value("l1", c.l1);
      c.l2 = j.value("l2", c.l2);
      c.max_iters = j.value("max_iters", c.max_iters);
      c.tol = j.value("tol", c.tol);
      cfg.params = c;
      break;
    }
    case Family::RF: {
      RfConfig c;
      c.trees = j.value("trees", c.trees);
      c.max_depth = j.value("max_depth", c.max_depth);
      c.feature_subset = j.value("feature_subset", c.feature_subset);
      c.min_leaf = j.value("min_leaf", c.min_leaf);
      c.bootstrap = j.value("bootstrap", c.bootstrap);
      c.seed = j.value("seed", c.seed);
      cfg.params = c;
      break;
    }
    case Family::GBT: {
      GbtConfig c;
      c.rounds = j.value("rounds", c.rounds);
      c.learning_rate = j.value("learning_rate", c.learning_rate);
      c.leaf_penalty = j.value("leaf_penalty", c.leaf_penalty);
      c.split_penalty = j.value("split_penalty", c.split_penalty);
      c.max_depth = j.value("max_depth", c.max_depth);
      c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
      cfg.params = c;
      break;
    }
    case Family::MLP: {
      MlpConfig c;
      c.hidden = j.value("hidden", c.hidden);
      c.dropout = j.value("dropout", c.dropout);
      c.dropout_layers = j.value("dropout_layers", c.dropout_layers);
      c.adam_step = j.value("adam_step", c.adam_step);
      c.beta1 = j.value("beta1", c.beta1);
      c.beta2 = j.value("beta2", c.beta2);
      c.epsilon = j.value("epsilon", c.epsilon);
      c.epochs = j.value("epochs", c.epochs);
      c.batch = j.value("batch", c.batch);
      c.seed = j.value("seed", c.seed);
      cfg.params = c;
      break;
    }
  }
  return cfg;
}

// ----------------------------------------------------------- artifact JSON

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = n_rows == 0 ? 0 : static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r)
    for (Eigen::Index c = 0; c < n_cols; ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  return m;
}

json tree_to_json(const Tree& tree) {
  json nodes = json::array();
  for (const TreeNode& n : tree.nodes)
    nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

Tree tree_from_json(const json& nodes) {
  Tree tree;
  for (const auto& n : nodes) {
    TreeNode node;
    node.feature = n[0].get<int>();
    node.threshold = n[1].get<double>();
    node.left = n[2].get<int>();
    node.right = n[3].get<int>();
    node.value = n[4].get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

json window_to_json(const WindowSpec& w) {
  return json{{"strategy", to_string(w.strategy)},
              {"start", w.train.start},
              {"end", w.train.end},
              {"iteration", w.iteration}};
}

WindowSpec window_from_json(const json& j) {
  WindowSpec w;
  w.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  w.train.start = j.at("start").get<int>();
  w.train.end = j.at("end").get<int>();
  w.iteration = j.at("iteration").get<int>();
  return w;
}

}  // namespace

Eigen::Index ModelArtifact::feature_count() const {
  switch (family) {
    case Family::LR: return std::get<LogisticModel>(model).weights.size();
    case Family::RF: return std::get<ForestModel>(model).importance.size();
    case Family::GBT: return std::get<BoostedModel>(model).importance.size();
    case Family::MLP: return std::get<MlpModel>(model).weights.front().rows();
  }
  return 0;
}

json ModelArtifact::to_json() const {
  json jm;
  switch (family) {
    case Family::LR: {
      const auto& m = std::get<LogisticModel>(model);
      jm = json{{"weights", vector_to_json(m.weights)},
                {"intercept", m.intercept},
                {"active", m.active},
                {"final_grad_norm", m.final_grad_norm}};
      break;
    }
    case Family::RF: {
      const auto& m = std::get<ForestModel>(model);
      json trees = json::array();
      for (const Tree& t : m.trees) trees.push_back(tree_to_json(t));
      jm = json{{"trees", std::move(trees)}, {"importance", vector_to_json(m.importance)}};
      break;
    }
    case Family::GBT: {
      const auto& m = std::get<BoostedModel>(model);
      json trees = json::array();
      for (const Tree& t : m.trees) trees.push_back(tree_to_json(t));
      jm = json{{"base_score", m.base_score},
                {"learning_rate", m.learning_rate},
                {"trees", std::move(trees)},
                {"importance", vector_to_json(m.importance)}};
      break;
    }
    case Family::MLP: {
      const auto& m = std::get<MlpModel>(model);
      json ws = json::array();
      json bs = json::array();
      for (const auto& w : m.weights) ws.push_back(matrix_to_json(w));
      for (const auto& b : m.biases) bs.push_back(vector_to_json(b));
      jm = json{{"weights", std::move(ws)}, {"biases", std::move(bs)}};
      break;
    }
  }
  return json{{"format_version", 1},
              {"family", to_string(family)},
              {"config", config.to_json()},
              {"model", std::move(jm)},
              {"converged", converged},
              {"provenance",
               json{{"window", window_to_json(provenance.window)},
                    {"rows", provenance.rows},
                    {"bad_rate", provenance.bad_rate},
                    {"threshold", provenance.threshold},
                    {"data_fingerprint", provenance.data_fingerprint},
                    {"feature_names", provenance.feature_names},
                    {"psi_edges", provenance.psi_edges},
                    {"psi_expected", provenance.psi_expected}}}};
}

ModelArtifact ModelArtifact::from_json(const json& j) {
  ModelArtifact artifact;
  artifact.family = family_from_string(j.at("family").get<std::string>());
  artifact.config = LearnerConfig::from_json(j.at("config"));
  artifact.converged = j.at("converged").get<bool>();
  const json& jm = j.at("model");
  switch (artifact.family) {
    case Family::LR: {
      LogisticModel m;
      m.weights = vector_from_json(jm.at("weights"));
      m.intercept = jm.at("intercept").get<double>();
      m.active = jm.at("active").get<std::vector<int>>();
      m.final_grad_norm = jm.at("final_grad_norm").get<double>();
      artifact.model = std::move(m);
      break;
    }
    case Family::RF: {
      ForestModel m;
      for (const auto& t : jm.at("trees")) m.trees.push_back(tree_from_json(t));
      m.importance = vector_from_json(jm.at("importance"));
      artifact.model = std::move(m);
      break;
    }
    case Family::GBT: {
      BoostedModel m;
      m.base_score = jm.at("base_score").get<double>();
      m.learning_rate = jm.at("learning_rate").get<double>();
      for (const auto& t : jm.at("trees")) m.trees.push_back(tree_from_json(t));
      m.importance = vector_from_json(jm.at("importance"));
      artifact.model = std::move(m);
      break;
    }
    case Family::MLP: {
      MlpModel m;
      for (const auto& w : jm.at("weights")) m.weights.push_back(matrix_from_json(w));
      for (const auto& b : jm.at("biases")) m.biases.push_back(vector_from_json(b));
      artifact.model = std::move(m);
      break;
    }
  }
  const json& jp = j.at("provenance");
  artifact.provenance.window = window_from_json(jp.at("window"));
  artifact.provenance.rows = jp.at("rows").get<std::int64_t>();
  artifact.provenance.bad_rate = jp.at("bad_rate").get<double>();
  artifact.provenance.threshold = jp.at("threshold").get<double>();
  artifact.provenance.data_fingerprint = jp.at("data_fingerprint").get<std::string>();
  artifact.provenance.feature_names = jp.at("feature_names").get<std::vector<std::string>>();
  artifact.provenance.psi_edges = jp.at("psi_edges").get<std::vector<double>>();
  artifact.provenance.psi_expected = jp.at("psi_expected").get<std::vector<double>>();
  return artifact;
}

std::string ModelArtifact::content_hash() const { return sha256_hex(to_json().dump()); }

// ------------------------------------------------------------- prediction

Eigen::VectorXd predict_proba(const ModelArtifact& artifact, const Eigen::MatrixXd& X) {
  if (X.cols() != artifact.feature_count())
    throw Error("feature-count-mismatch", "model expects " + std::to_string(artifact.feature_count()) +
                                              " features, got " + std::to_string(X.cols()));
  Eigen::VectorXd p;
  switch (artifact.family) {
    case Family::LR: {
      const auto& m = std::get<LogisticModel>(artifact.model);
      p = sigmoid(Eigen::VectorXd((X * m.weights).array() + m.intercept));
      break;
    }
    case Family::RF: {
      const auto& m = std::get<ForestModel>(artifact.model);
      p = Eigen::VectorXd::Zero(X.rows());
      for (const Tree& tree : m.trees)
        for (Eigen::Index i = 0; i < X.rows(); ++i) p(i) += tree.predict_row(X.row(i));
      p /= static_cast<double>(m.trees.size());
      break;
    }
    case Family::GBT: {
      const auto& m = std::get<BoostedModel>(artifact.model);
      Eigen::VectorXd raw = Eigen::VectorXd::Constant(X.rows(), m.base_score);
      for (const Tree& tree : m.trees)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
          raw(i) += m.learning_rate * tree.predict_row(X.row(i));
      p = sigmoid(raw);
      break;
    }
    case Family::MLP: {
      p = mlp_forward(std::get<MlpModel>(artifact.model), X);
      break;
    }
  }
  return p.cwiseMax(kProbabilityClamp).cwiseMin(1.0 - kProbabilityClamp);
}

ImportanceReport feature_importance(const ModelArtifact& artifact) {
  switch (artifact.family) {
    case Family::LR: {
      const auto& m = std::get<LogisticModel>(artifact.model);
      return ImportanceReport::from_scores(artifact.provenance.feature_names,
                                           m.weights.cwiseAbs());
    }
    case Family::RF:
      return ImportanceReport::from_scores(artifact.provenance.feature_names,
                                           std::get<ForestModel>(artifact.model).importance);
    case Family::GBT:
      return ImportanceReport::from_scores(artifact.provenance.feature_names,
                                           std::get<BoostedModel>(artifact.model).importance);
    case Family::MLP:
      throw Error("unsupported-family",
                  "MLP has no native importance; use permutation_importance");
  }
  throw Error("invalid-config", "bad family");
}

ModelArtifact train_model(const Dataset& train, const LearnerConfig& config) {
  switch (config.family) {
    case Family::LR: return train_lr(train, config.lr());
    case Family::RF: return train_rf(train, config.rf());
    case Family::GBT: return train_gbt(train, config.gbt());
    case Family::MLP: return train_mlp(train, config.mlp());
  }
  throw Error("invalid-config", "bad family");
}

std::size_t param_count(const LearnerConfig& config, Eigen::Index n_features) {
  if (config.family != Family::MLP)
    throw Error("wrong-family", "param_count is defined for the MLP family");
  return mlp_param_count(config.mlp(), n_features);
}

}  // namespace ccr
