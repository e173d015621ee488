#include "ccr/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "ccr/error.hpp"
#include "ccr/hash.hpp"

namespace ccr {

using nlohmann::json;

Eigen::VectorXd ScoringPipeline::score(const RawTable& table, const ColumnSchema& schema,
                                       std::span<const std::size_t> rows) const {
  const Dataset data = apply_preprocess(table, schema, plan, rows);
  return predict_proba(model, data.X);
}

json ScoringPipeline::to_json() const {
  return json{{"plan", plan.to_json()}, {"model", model.to_json()}};
}

ScoringPipeline ScoringPipeline::from_json(const json& j) {
  ScoringPipeline pipeline;
  pipeline.plan = PreprocessPlan::from_json(j.at("plan"));
  pipeline.model = ModelArtifact::from_json(j.at("model"));
  return pipeline;
}

std::string ScoringPipeline::content_hash() const { return sha256_hex(to_json().dump()); }

json ScoringPipeline::to_artifact_json() const {
  json j = to_json();
  j["content_hash"] = content_hash();
  return j;
}

ScoringPipeline ScoringPipeline::from_artifact_json(const json& j) {
  ScoringPipeline pipeline = from_json(j);
  const std::string declared = j.at("content_hash").get<std::string>();
  const std::string actual = pipeline.content_hash();
  if (declared != actual)
    throw Error("hash-mismatch", "artifact hash " + declared + " != recomputed " + actual);
  return pipeline;
}

}  // namespace ccr
