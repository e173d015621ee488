#pragma once

#include <nlohmann/json_fwd.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ccr/dataset.hpp"
#include "ccr/learners/common.hpp"
#include "ccr/metrics.hpp"
#include "ccr/pipeline.hpp"

namespace ccr {

struct RunRecord {
  std::string run_id;  // content-addressed; assigned by record_run
  int period = 0;
  Family family = Family::LR;
  Strategy strategy = Strategy::FixedWindow;
  WindowSpec window;
  nlohmann::json config;                        // full LearnerConfig snapshot
  std::string trial_log_path;                   // store-relative
  std::map<std::string, MetricReport> metrics;  // split name -> report
  std::string artifact_path;                    // store-relative
  std::string artifact_hash;
  std::string data_fingerprint;
  std::string parent_champion;                  // run id or ""
  std::string timestamp;                        // replay clock, e.g. "month-014"

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
};

nlohmann::json metric_report_to_json(const MetricReport& report);
MetricReport metric_report_from_json(const nlohmann::json& j);

// Append-only, content-addressed run store:
//   <root>/index.txt          run ids, append order
//   <root>/lineage.txt        "<period> <run id>" per completed period
//   <root>/runs/<id>/record.json, artifact.json, trials.json
// run id = sha256(config, window, data fingerprint, artifact hash).
// Trial wall times are stored but excluded from every content hash.
class Registry {
public:
  explicit Registry(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  // Appends the record plus its artifact and trial log; rewriting an existing
  // id with different content is an error. Errors:
  // id-collision-with-different-content, unwritable-store.
  std::string record_run(RunRecord record, const nlohmann::json& artifact_json,
                         const nlohmann::json& trials_json);

  void append_lineage(int period, const std::string& run_id);

  // One (period, run id) per completed period, period order.
  // Error: corrupt-store.
  std::vector<std::pair<int, std::string>> champion_lineage() const;

  std::vector<std::string> run_ids() const;  // append order
  RunRecord load_record(const std::string& run_id) const;

  // Hash-verified artifact load. Errors: missing-id, hash-mismatch.
  ScoringPipeline load_artifact(const std::string& run_id) const;

  // SHA-256 over index, lineage, records, and artifacts (not trial logs).
  std::string content_hash() const;

private:
  std::filesystem::path run_dir(const std::string& run_id) const;
  std::filesystem::path root_;
};

}  // namespace ccr
