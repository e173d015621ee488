#include "ccr/tuner.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>

#include "ccr/error.hpp"
#include "ccr/metrics.hpp"
#include "ccr/rng.hpp"
#include "ccr/util/parallel.hpp"

namespace ccr {

using nlohmann::json;

ParamSpec ParamSpec::linear(double lo, double hi, bool integer) {
  return ParamSpec{Kind::Linear, lo, hi, integer, {}};
}

ParamSpec ParamSpec::log(double lo, double hi, bool integer) {
  return ParamSpec{Kind::Log, lo, hi, integer, {}};
}

ParamSpec ParamSpec::choice(std::vector<double> values) {
  ParamSpec spec;
  spec.kind = Kind::Choice;
  spec.choices = std::move(values);
  return spec;
}

void ParamSpec::validate() const {
  switch (kind) {
    case Kind::Linear:
      if (hi < lo) throw Error("invalid-spec", "empty linear range");
      break;
    case Kind::Log:
      if (lo <= 0.0 || hi < lo) throw Error("invalid-spec", "log range must be positive");
      break;
    case Kind::Choice:
      if (choices.empty()) throw Error("invalid-spec", "empty choice set");
      break;
  }
}

SearchSpace default_space(Family family) {
  switch (family) {
    case Family::LR:
      return {{"l1", ParamSpec::log(1e-5, 1e-1)}, {"l2", ParamSpec::log(1e-5, 1e0)}};
    case Family::RF:
      return {{"trees", ParamSpec::linear(30, 120, true)},
              {"max_depth", ParamSpec::linear(4, 10, true)},
              {"min_leaf", ParamSpec::linear(1, 20, true)}};
    case Family::GBT:
      return {{"rounds", ParamSpec::linear(20, 60, true)},
              {"learning_rate", ParamSpec::log(0.05, 0.5)},
              {"leaf_penalty", ParamSpec::log(0.5, 5.0)},
              {"split_penalty", ParamSpec::linear(0.0, 2.0)},
              {"max_depth", ParamSpec::linear(2, 4, true)},
              {"min_child_weight", ParamSpec::log(0.5, 10.0)}};
    case Family::MLP:
      return {{"adam_step", ParamSpec::log(1e-4, 1e-2)},
              {"epochs", ParamSpec::linear(5, 15, true)},
              {"batch", ParamSpec::choice({128, 256, 512})}};
  }
  throw Error("invalid-spec", "bad family");
}

int default_budget(Family family) {
  switch (family) {
    case Family::LR: return 20;
    case Family::RF: return 25;
    case Family::GBT: return 40;
    case Family::MLP: return 25;
  }
  return 10;
}

SearchSpace space_from_json(const json& j) {
  SearchSpace space;
  for (const auto& [name, spec] : j.items()) {
    ParamSpec p;
    const std::string kind = spec.at("kind").get<std::string>();
    if (kind == "linear") p.kind = ParamSpec::Kind::Linear;
    else if (kind == "log") p.kind = ParamSpec::Kind::Log;
    else if (kind == "choice") p.kind = ParamSpec::Kind::Choice;
    else throw Error("invalid-spec", "unknown param kind '" + kind + "'");
    if (p.kind == ParamSpec::Kind::Choice) {
      p.choices = spec.at("choices").get<std::vector<double>>();
    } else {
      p.lo = spec.at("lo").get<double>();
      p.hi = spec.at("hi").get<double>();
    }
    p.integer = spec.value("integer", false);
    p.validate();
    space.emplace_back(name, p);
  }
  return space;
}

namespace {

double sample_param(const ParamSpec& spec, Rng& rng) {
  double v = 0.0;
  switch (spec.kind) {
    case ParamSpec::Kind::Linear: v = rng.uniform(spec.lo, spec.hi); break;
    case ParamSpec::Kind::Log: v = std::exp(rng.uniform(std::log(spec.lo), std::log(spec.hi))); break;
    case ParamSpec::Kind::Choice:
      return spec.choices[static_cast<std::size_t>(rng.below(spec.choices.size()))];
  }
  if (spec.integer) v = std::floor(v + 0.5);
  return v;
}

void set_if(const std::map<std::string, double>& params, const char* name, double& out) {
  const auto it = params.find(name);
  if (it != params.end()) out = it->second;
}

void set_if(const std::map<std::string, double>& params, const char* name, int& out) {
  const auto it = params.find(name);
  if (it != params.end()) out = static_cast<int>(std::llround(it->second));
}

}  // namespace

LearnerConfig config_from_params(Family family, const std::map<std::string, double>& params) {
  LearnerConfig cfg = LearnerConfig::defaults(family);
  switch (family) {
    case Family::LR: {
      LrConfig c = cfg.lr();
      set_if(params, "l1", c.l1);
      set_if(params, "l2", c.l2);
      set_if(params, "max_iters", c.max_iters);
      set_if(params, "tol", c.tol);
      cfg.params = c;
      break;
    }
    case Family::RF: {
      RfConfig c = cfg.rf();
      set_if(params, "trees", c.trees);
      set_if(params, "max_depth", c.max_depth);
      set_if(params, "feature_subset", c.feature_subset);
      set_if(params, "min_leaf", c.min_leaf);
      cfg.params = c;
      break;
    }
    case Family::GBT: {
      GbtConfig c = cfg.gbt();
      set_if(params, "rounds", c.rounds);
      set_if(params, "learning_rate", c.learning_rate);
      set_if(params, "leaf_penalty", c.leaf_penalty);
      set_if(params, "split_penalty", c.split_penalty);
      set_if(params, "max_depth", c.max_depth);
      set_if(params, "min_child_weight", c.min_child_weight);
      cfg.params = c;
      break;
    }
    case Family::MLP: {
      MlpConfig c = cfg.mlp();
      set_if(params, "adam_step", c.adam_step);
      set_if(params, "epochs", c.epochs);
      set_if(params, "batch", c.batch);
      set_if(params, "dropout", c.dropout);
      cfg.params = c;
      break;
    }
  }
  return cfg;
}

json Trial::to_json() const {
  return json{{"trial", index},   {"params", params}, {"objective", objective},
              {"failed", failed}, {"error", error},   {"wall_ms", wall_ms}};
}

json TuneResult::trials_json() const {
  json arr = json::array();
  for (const Trial& t : trials) arr.push_back(t.to_json());
  return json{{"best_index", best_index}, {"trials", std::move(arr)}};
}

TuneResult tune(Family family, const Dataset& train, const Dataset& itv, const SearchSpace& space,
                int budget, std::uint64_t seed, int threads) {
  if (budget < 1) throw Error("invalid-spec", "budget must be >= 1");
  for (const auto& [name, spec] : space) spec.validate();

  TuneResult result;
  result.trials.resize(static_cast<std::size_t>(budget));

  // Each trial owns an independent stream; the log is assembled by index, so
  // concurrent execution cannot perturb the outcome.
  parallel_for(static_cast<std::size_t>(budget), threads, [&](std::size_t t) {
    Trial& trial = result.trials[t];
    trial.index = static_cast<int>(t);
    Rng rng(sub_seed(seed, "tuner-trial", t));
    for (const auto& [name, spec] : space) trial.params[name] = sample_param(spec, rng);

    const auto t0 = std::chrono::steady_clock::now();
    try {
      LearnerConfig cfg = config_from_params(family, trial.params);
      const ModelArtifact artifact = train_model(train, cfg);
      const Eigen::VectorXd scores = predict_proba(artifact, itv.X);
      trial.objective = auc(ScoredSample{scores, itv.y, {}});
    } catch (const std::exception& e) {
      trial.failed = true;
      trial.objective = 0.0;
      trial.error = e.what();
    }
    trial.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0).count();
  });

  for (const Trial& trial : result.trials) {
    if (trial.failed) continue;
    if (result.best_index < 0 || trial.objective > result.trials[static_cast<std::size_t>(result.best_index)].objective)
      result.best_index = trial.index;
  }
  if (result.best_index < 0) throw Error("all-trials-failed", "no trial produced a finite objective");
  result.best = config_from_params(family, result.trials[static_cast<std::size_t>(result.best_index)].params);
  return result;
}

}  // namespace ccr
