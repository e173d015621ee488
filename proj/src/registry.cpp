#include "ccr/registry.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

#include "ccr/error.hpp"
#include "ccr/hash.hpp"

namespace ccr {

using nlohmann::json;

json metric_report_to_json(const MetricReport& report) {
  json j{{"auc", report.auc},
         {"ks", report.ks},
         {"f1", report.f1},
         {"precision", report.precision},
         {"recall", report.recall},
         {"three_decile_capture", report.three_decile_capture},
         {"threshold", report.threshold}};
  if (report.psi) j["psi"] = *report.psi;
  if (report.eo_gap) j["eo_gap"] = *report.eo_gap;
  return j;
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport report;
  report.auc = j.at("auc").get<double>();
  report.ks = j.at("ks").get<double>();
  report.f1 = j.at("f1").get<double>();
  report.precision = j.at("precision").get<double>();
  report.recall = j.at("recall").get<double>();
  report.three_decile_capture = j.at("three_decile_capture").get<double>();
  report.threshold = j.at("threshold").get<double>();
  if (j.contains("psi")) report.psi = j.at("psi").get<double>();
  if (j.contains("eo_gap")) report.eo_gap = j.at("eo_gap").get<double>();
  return report;
}

json RunRecord::to_json() const {
  json metrics_json;
  for (const auto& [split, report] : metrics) metrics_json[split] = metric_report_to_json(report);
  return json{{"run_id", run_id},
              {"period", period},
              {"family", to_string(family)},
              {"strategy", to_string(strategy)},
              {"window", json{{"strategy", to_string(window.strategy)},
                              {"start", window.train.start},
                              {"end", window.train.end},
                              {"iteration", window.iteration}}},
              {"config", config},
              {"trial_log", trial_log_path},
              {"metrics", std::move(metrics_json)},
              {"artifact_path", artifact_path},
              {"artifact_hash", artifact_hash},
              {"data_fingerprint", data_fingerprint},
              {"parent_champion", parent_champion},
              {"timestamp", timestamp}};
}

RunRecord RunRecord::from_json(const json& j) {
  RunRecord r;
  r.run_id = j.at("run_id").get<std::string>();
  r.period = j.at("period").get<int>();
  r.family = family_from_string(j.at("family").get<std::string>());
  r.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  r.window.strategy = strategy_from_string(j.at("window").at("strategy").get<std::string>());
  r.window.train.start = j.at("window").at("start").get<int>();
  r.window.train.end = j.at("window").at("end").get<int>();
  r.window.iteration = j.at("window").at("iteration").get<int>();
  r.config = j.at("config");
  r.trial_log_path = j.at("trial_log").get<std::string>();
  for (const auto& [split, report] : j.at("metrics").items())
    r.metrics[split] = metric_report_from_json(report);
  r.artifact_path = j.at("artifact_path").get<std::string>();
  r.artifact_hash = j.at("artifact_hash").get<std::string>();
  r.data_fingerprint = j.at("data_fingerprint").get<std::string>();
  r.parent_champion = j.at("parent_champion").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  return r;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-store", "cannot write " + path.string());
  out << content;
  if (!out) throw Error("unwritable-store", "short write to " + path.string());
}

std::string read_file(const std::filesystem::path& path, const char* missing_code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing_code, path.string() + " not readable");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

Registry::Registry(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "runs", ec);
  if (ec) throw Error("unwritable-store", root_.string() + ": " + ec.message());
}

std::filesystem::path Registry::run_dir(const std::string& run_id) const {
  return root_ / "runs" / run_id;
}

std::string Registry::record_run(RunRecord record, const json& artifact_json,
                                 const json& trials_json) {
  // The id covers exactly (config, window, data fingerprint, artifact hash).
  const json id_payload{{"config", record.config},
                        {"window", json{{"strategy", to_string(record.window.strategy)},
                                        {"start", record.window.train.start},
                                        {"end", record.window.train.end},
                                        {"iteration", record.window.iteration}}},
                        {"data_fingerprint", record.data_fingerprint},
                        {"artifact_hash", record.artifact_hash}};
  const std::string run_id = sha256_hex(id_payload.dump()).substr(0, 24);
  record.run_id = run_id;
  record.trial_log_path = "runs/" + run_id + "/trials.json";
  record.artifact_path = "runs/" + run_id + "/artifact.json";

  const std::string record_bytes = record.to_json().dump(2) + "\n";
  const auto dir = run_dir(run_id);
  if (std::filesystem::exists(dir / "record.json")) {
    const std::string existing = read_file(dir / "record.json", "corrupt-store");
    if (existing != record_bytes)
      throw Error("id-collision-with-different-content",
                  "run " + run_id + " already exists with different content");
    return run_id;  // idempotent rewrite of identical content
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("unwritable-store", dir.string() + ": " + ec.message());
  write_file(dir / "artifact.json", artifact_json.dump(2) + "\n");
  write_file(dir / "trials.json", trials_json.dump(2) + "\n");
  write_file(dir / "record.json", record_bytes);

  std::ofstream index(root_ / "index.txt", std::ios::app);
  if (!index) throw Error("unwritable-store", "cannot append to index");
  index << run_id << "\n";
  return run_id;
}

void Registry::append_lineage(int period, const std::string& run_id) {
  std::ofstream out(root_ / "lineage.txt", std::ios::app);
  if (!out) throw Error("unwritable-store", "cannot append to lineage");
  out << period << " " << run_id << "\n";
}

std::vector<std::pair<int, std::string>> Registry::champion_lineage() const {
  std::vector<std::pair<int, std::string>> lineage;
  std::ifstream in(root_ / "lineage.txt");
  if (!in) return lineage;  // empty store: no completed periods
  std::string line;
  int expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream parts(line);
    int period = -1;
    std::string run_id;
    if (!(parts >> period >> run_id) || period != expected)
      throw Error("corrupt-store", "bad lineage line: '" + line + "'");
    lineage.emplace_back(period, run_id);
    ++expected;
  }
  return lineage;
}

std::vector<std::string> Registry::run_ids() const {
  std::vector<std::string> ids;
  std::ifstream in(root_ / "index.txt");
  if (!in) return ids;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ids.push_back(line);
  return ids;
}

RunRecord Registry::load_record(const std::string& run_id) const {
  const auto path = run_dir(run_id) / "record.json";
  if (!std::filesystem::exists(path)) throw Error("missing-id", "no run " + run_id);
  return RunRecord::from_json(json::parse(read_file(path, "corrupt-store")));
}

ScoringPipeline Registry::load_artifact(const std::string& run_id) const {
  const auto path = run_dir(run_id) / "artifact.json";
  if (!std::filesystem::exists(path)) throw Error("missing-id", "no run " + run_id);
  json parsed;
  try {
    parsed = json::parse(read_file(path, "corrupt-store"));
  } catch (const json::exception& e) {
    throw Error("hash-mismatch", "artifact for " + run_id + " unparseable: " + e.what());
  }
  return ScoringPipeline::from_artifact_json(parsed);
}

std::string Registry::content_hash() const {
  std::string buffer;
  const auto append_file = [&](const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return;
    buffer += path.filename().string();
    buffer += '\0';
    buffer += read_file(path, "corrupt-store");
    buffer += '\0';
  };
  append_file(root_ / "index.txt");
  append_file(root_ / "lineage.txt");
  for (const std::string& id : run_ids()) {
    buffer += id;
    buffer += '\0';
    buffer += read_file(run_dir(id) / "record.json", "corrupt-store");
    buffer += read_file(run_dir(id) / "artifact.json", "corrupt-store");
  }
  return sha256_hex(buffer);
}

}  // namespace ccr
