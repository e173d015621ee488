#pragma once

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <string>
#include <vector>

#include "ccr/learners/common.hpp"

namespace ccr {

struct ParamSpec {
  enum class Kind { Linear, Log, Choice };
  Kind kind = Kind::Linear;
  double lo = 0.0;
  double hi = 0.0;
  bool integer = false;
  std::vector<double> choices;

  static ParamSpec linear(double lo, double hi, bool integer = false);
  static ParamSpec log(double lo, double hi, bool integer = false);  // lo > 0
  static ParamSpec choice(std::vector<double> values);

  void validate() const;  // Error: invalid-spec (empty range, log over <= 0)
};

// Ordered so sampling order (and thus the trial sequence) is deterministic.
using SearchSpace = std::vector<std::pair<std::string, ParamSpec>>;

SearchSpace default_space(Family family);
int default_budget(Family family);  // LR 20, RF 25, GBT 40, MLP 25

SearchSpace space_from_json(const nlohmann::json& j);

// Builds a full LearnerConfig from sampled values; unnamed parameters keep
// the family defaults.
LearnerConfig config_from_params(Family family, const std::map<std::string, double>& params);

struct Trial {
  int index = 0;
  std::map<std::string, double> params;
  double objective = 0.0;  // ITV AUC
  bool failed = false;
  std::string error;
  double wall_ms = 0.0;    // informational only; excluded from content hashes

  nlohmann::json to_json() const;
};

struct TuneResult {
  LearnerConfig best;
  int best_index = -1;
  std::vector<Trial> trials;

  nlohmann::json trials_json() const;
};

// Runs `budget` seeded trials: sample a config, train on `train`, score AUC
// on `itv`. Ties go to the lowest trial index; failed trials are logged and
// skipped. The tuner never sees OTV or PROD rows by construction.
// Errors: invalid-spec (budget < 1), all-trials-failed.
TuneResult tune(Family family, const Dataset& train, const Dataset& itv, const SearchSpace& space,
                int budget, std::uint64_t seed, int threads = 1);

}  // namespace ccr
