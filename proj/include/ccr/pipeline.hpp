#pragma once

#include <nlohmann/json_fwd.hpp>

#include "ccr/learners/common.hpp"
#include "ccr/preprocess.hpp"

namespace ccr {

// A deployable unit: the window-scoped preprocessing plan plus the fitted
// model. Serialized as one artifact with an embedded content hash.
struct ScoringPipeline {
  PreprocessPlan plan;
  ModelArtifact model;

  Eigen::VectorXd score(const RawTable& table, const ColumnSchema& schema,
                        std::span<const std::size_t> rows) const;

  nlohmann::json to_json() const;             // payload only, no hash field
  static ScoringPipeline from_json(const nlohmann::json& j);
  std::string content_hash() const;

  // Payload wrapped with {"content_hash": ...}; verified on load
  // (Error: hash-mismatch).
  nlohmann::json to_artifact_json() const;
  static ScoringPipeline from_artifact_json(const nlohmann::json& j);
};

}  // namespace ccr
