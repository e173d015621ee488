#pragma once

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ccr/dataset.hpp"
#include "ccr/learners/tree.hpp"
#include "ccr/metrics.hpp"

namespace ccr {

enum class Family { LR, RF, GBT, MLP };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct LrConfig {
  double l1 = 0.01;        // stage-1 lasso strength
  double l2 = 0.001;       // stage-2 ridge strength
  int max_iters = 500;
  double tol = 1e-6;       // gradient-norm / proximal-residual stop
};

struct RfConfig {
  int trees = 100;
  int max_depth = 8;
  int feature_subset = 0;  // p; 0 means sqrt(N)
  int min_leaf = 5;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct GbtConfig {
  int rounds = 50;
  double learning_rate = 0.3;
  double leaf_penalty = 1.0;     // lambda
  double split_penalty = 0.0;    // gamma
  int max_depth = 3;
  double min_child_weight = 1.0;
};

struct MlpConfig {
  std::vector<int> hidden = {150, 150, 150};
  double dropout = 0.10;
  std::vector<int> dropout_layers = {0, 2};  // hidden layers 1 and 3
  double adam_step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 10;
  int batch = 256;
  std::uint64_t seed = 0;
};

struct LearnerConfig {
  Family family = Family::LR;
  std::variant<LrConfig, RfConfig, GbtConfig, MlpConfig> params = LrConfig{};

  static LearnerConfig defaults(Family family);

  const LrConfig& lr() const { return std::get<LrConfig>(params); }
  const RfConfig& rf() const { return std::get<RfConfig>(params); }
  const GbtConfig& gbt() const { return std::get<GbtConfig>(params); }
  const MlpConfig& mlp() const { return std::get<MlpConfig>(params); }

  // Errors: invalid-config on out-of-range values (negative strengths,
  // learning rate outside [0,1], dropout outside [0,1), K < 1).
  void validate() const;

  nlohmann::json to_json() const;
  static LearnerConfig from_json(const nlohmann::json& j);
};

// ---- fitted models -------------------------------------------------------

struct LogisticModel {
  Eigen::VectorXd weights;       // full feature width, zeros where dropped
  double intercept = 0.0;
  std::vector<int> active;       // stage-1 survivors
  double final_grad_norm = 0.0;
};

struct ForestModel {
  std::vector<Tree> trees;               // leaf values are class frequencies
  Eigen::VectorXd importance;            // mean Gini decrease per feature
};

struct BoostedModel {
  double base_score = 0.0;               // raw log-odds of the train bad rate
  double learning_rate = 0.3;
  std::vector<Tree> trees;               // leaf values are unshrunk weights
  Eigen::VectorXd importance;            // total split gain per feature
};

struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: fan_in x fan_out
  std::vector<Eigen::VectorXd> biases;
};

struct TrainProvenance {
  WindowSpec window;
  std::int64_t rows = 0;
  double bad_rate = 0.0;
  double threshold = 0.5;             // train-bad-rate score quantile
  std::string data_fingerprint;
  std::vector<std::string> feature_names;
  std::vector<double> psi_edges;      // train-score decile edges (PSI reference)
  std::vector<double> psi_expected;   // train-score proportions per bin
};

struct ModelArtifact {
  Family family = Family::LR;
  LearnerConfig config;
  std::variant<LogisticModel, ForestModel, BoostedModel, MlpModel> model;
  TrainProvenance provenance;
  bool converged = true;

  Eigen::Index feature_count() const;

  // Canonical serialization; `content_hash` is the SHA-256 of the dump.
  nlohmann::json to_json() const;
  static ModelArtifact from_json(const nlohmann::json& j);
  std::string content_hash() const;
};

// Probabilities in (0, 1), clamped away from the endpoints so pure forest
// leaves and saturated sigmoids stay inside the open interval.
// Error: feature-count-mismatch.
Eigen::VectorXd predict_proba(const ModelArtifact& artifact, const Eigen::MatrixXd& X);

// Native importances: RF mean Gini decrease, GBT total gain, LR |coefficient|
// over the retained features. Error: unsupported-family for MLP.
ImportanceReport feature_importance(const ModelArtifact& artifact);

// Dispatch on config.family. Error: single-class-labels.
ModelArtifact train_model(const Dataset& train, const LearnerConfig& config);

// Affine weight+bias count; dropout-wrapped hidden layers additionally
// contribute their per-unit mask slot when the dropout rate is positive.
// Error: wrong-family unless config.family == MLP.
std::size_t param_count(const LearnerConfig& config, Eigen::Index n_features);

inline constexpr double kProbabilityClamp = 1e-12;

}  // namespace ccr
