#include "ccr/orchestrator.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>

#include "ccr/error.hpp"
#include "ccr/hash.hpp"
#include "ccr/rng.hpp"

namespace ccr {

using nlohmann::json;

int ReplaySchedule::budget_for(Family family) const {
  const auto it = tune_budgets.find(to_string(family));
  return it != tune_budgets.end() ? it->second : default_budget(family);
}

const SearchSpace* ReplaySchedule::space_for(Family family) const {
  const auto it = search_spaces.find(to_string(family));
  return it != search_spaces.end() ? &it->second : nullptr;
}

void ReplaySchedule::validate() const {
  if (periods < 1) throw Error("invalid-spec", "periods must be >= 1");
  if (release_width < 1) throw Error("invalid-spec", "release width must be >= 1");
  if (families.empty()) throw Error("invalid-spec", "at least one challenger family required");
  if (strategies.empty()) throw Error("invalid-spec", "at least one retraining strategy required");
  for (Strategy s : strategies)
    if (s == Strategy::FixedWindow)
      throw Error("invalid-spec", "fixed-window is the baseline, not a challenger strategy");
  for (const auto& [name, budget] : tune_budgets)
    if (budget < 1) throw Error("invalid-spec", "tune budget must be >= 1");
}

bool ChampionState::consider(int period, const std::string& candidate_run_id,
                             double candidate_score, Family candidate_family,
                             Strategy candidate_strategy) {
  if (!(candidate_score > score)) return false;  // strict inequality; ties retain
  run_id = candidate_run_id;
  score = candidate_score;
  family = candidate_family;
  strategy = candidate_strategy;
  history.push_back({period, candidate_run_id, candidate_score, candidate_family, candidate_strategy});
  return true;
}

double objective(const MetricReport& report) { return report.auc; }

std::size_t select_initial_champion(const std::vector<double>& objectives) {
  if (objectives.empty()) throw Error("empty-candidates", "no candidates to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < objectives.size(); ++i)
    if (objectives[i] > objectives[best]) best = i;
  return best;
}

// ---------------------------------------------------------------------------

namespace {

struct LiveChampion {
  ScoringPipeline pipeline;
  std::string run_id;
};

std::string replay_clock(const MonthWindow& prod) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "month-%03d", prod.start);
  return buf;
}

std::string candidate_tag(Family family, Strategy strategy) {
  return std::string(to_string(family)) + "/" + to_string(strategy);
}

std::string fingerprint_data(std::span<const std::size_t> train_rows, const PreprocessPlan& plan) {
  std::string buffer;
  buffer.reserve(train_rows.size() * 8 + 64);
  for (std::size_t r : train_rows) {
    for (int b = 0; b < 8; ++b) buffer.push_back(static_cast<char>((r >> (8 * b)) & 0xff));
  }
  buffer += plan.to_json().dump();
  return sha256_hex(buffer);
}

MetricReport report_with_psi(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                             const TrainProvenance& prov) {
  MetricReport report = evaluate_scores(scores, labels, prov.threshold);
  if (!prov.psi_edges.empty())
    report.psi = psi_from_proportions(prov.psi_expected, psi_proportions(scores, prov.psi_edges));
  return report;
}

struct ReplayContext {
  const RawTable& table;
  const ColumnSchema& schema;
  const SplitSpec& split;
  const ReplaySchedule& schedule;
  std::uint64_t seed;
  Registry& registry;
  int threads;
  Eigen::VectorXi vintage;
  Eigen::VectorXd labels;
};

// Builds one candidate end to end: window slice, 75/25 dev split, plan fit,
// tuning, final train, OTV evaluation, registry append.
CandidateResult build_candidate(ReplayContext& ctx, int period, Family family, Strategy strategy,
                                const MonthWindow& otv_window,
                                std::span<const std::size_t> otv_rows,
                                const std::string& parent_champion) {
  CandidateResult result;
  result.family = family;
  result.strategy = strategy;
  result.window = window_for(strategy, ctx.split.dev, period, ctx.schedule.release_width);

  // No look-ahead: training data must end strictly before this OTV window.
  if (result.window.train.end >= otv_window.start)
    throw Error("invalid-spec", "train window reaches into OTV at period " + std::to_string(period));

  const auto window_rows = rows_in_window(ctx.vintage, result.window.train);
  if (window_rows.empty())
    throw Error("empty-window", "period " + std::to_string(period) + " " +
                                    candidate_tag(family, strategy) + " train window is empty");

  // Families under the same strategy share the window partition.
  const std::uint64_t split_seed =
      sub_seed(ctx.seed, "dev-split", static_cast<std::uint64_t>(period), to_string(strategy));
  const auto train_rows = stratified_sample(ctx.labels, window_rows, ctx.split.train_fraction, split_seed);
  std::vector<std::size_t> itv_rows;
  {
    std::vector<char> in_train(static_cast<std::size_t>(ctx.vintage.size()), 0);
    for (std::size_t r : train_rows) in_train[r] = 1;
    for (std::size_t r : window_rows)
      if (!in_train[r]) itv_rows.push_back(r);
  }

  const PreprocessPlan plan = fit_preprocess(ctx.table, ctx.schema, train_rows);
  const Dataset train = apply_preprocess(ctx.table, ctx.schema, plan, train_rows);
  const Dataset itv = apply_preprocess(ctx.table, ctx.schema, plan, itv_rows);
  const Dataset otv = apply_preprocess(ctx.table, ctx.schema, plan, otv_rows);

  const std::string tag = candidate_tag(family, strategy);
  const SearchSpace* space_override = ctx.schedule.space_for(family);
  const SearchSpace space = space_override ? *space_override : default_space(family);
  TuneResult tuned = tune(family, train, itv, space, ctx.schedule.budget_for(family),
                          sub_seed(ctx.seed, "tuner", static_cast<std::uint64_t>(period), tag),
                          ctx.threads);

  // Final fit on the train rows with the winning config; model-internal seeds
  // come from the master stream.
  LearnerConfig best = tuned.best;
  const std::uint64_t train_seed =
      sub_seed(ctx.seed, "train", static_cast<std::uint64_t>(period), tag);
  if (best.family == Family::RF) std::get<RfConfig>(best.params).seed = train_seed;
  if (best.family == Family::MLP) std::get<MlpConfig>(best.params).seed = train_seed;

  ModelArtifact model = train_model(train, best);
  model.provenance.window = result.window;
  model.provenance.data_fingerprint = fingerprint_data(train_rows, plan);

  const Eigen::VectorXd train_scores = predict_proba(model, train.X);
  model.provenance.threshold = rate_matching_threshold(train_scores, train.bad_rate());
  model.provenance.psi_edges = psi_bin_edges(train_scores, ctx.schedule.psi_bins);
  model.provenance.psi_expected = psi_proportions(train_scores, model.provenance.psi_edges);

  result.train_metrics = report_with_psi(train_scores, train.y, model.provenance);
  result.itv_metrics = report_with_psi(predict_proba(model, itv.X), itv.y, model.provenance);
  const Eigen::VectorXd otv_scores = predict_proba(model, otv.X);

  Eigen::VectorXd otv_labels(static_cast<Eigen::Index>(otv_rows.size()));
  for (Eigen::Index i = 0; i < otv_labels.size(); ++i)
    otv_labels(i) = ctx.labels(static_cast<Eigen::Index>(otv_rows[static_cast<std::size_t>(i)]));
  result.otv_metrics = report_with_psi(otv_scores, otv_labels, model.provenance);
  result.otv_objective = objective(result.otv_metrics);

  ScoringPipeline pipeline{plan, std::move(model)};
  RunRecord record;
  record.period = period;
  record.family = family;
  record.strategy = strategy;
  record.window = result.window;
  record.config = best.to_json();
  record.metrics = {{"train", result.train_metrics},
                    {"itv", result.itv_metrics},
                    {"otv", result.otv_metrics}};
  record.artifact_hash = pipeline.content_hash();
  record.data_fingerprint = pipeline.model.provenance.data_fingerprint;
  record.parent_champion = parent_champion;
  record.timestamp = replay_clock(ctx.split.prod[static_cast<std::size_t>(period)]);
  result.run_id =
      ctx.registry.record_run(std::move(record), pipeline.to_artifact_json(), tuned.trials_json());
  return result;
}

}  // namespace

ReplayReport replay(const RawTable& prepared, const ColumnSchema& schema, const SplitSpec& split,
                    const ReplaySchedule& schedule, std::uint64_t seed, Registry& registry,
                    int threads, const std::function<void(const PeriodReport&)>& on_period) {
  split.validate();
  schedule.validate();
  if (static_cast<std::size_t>(schedule.periods) != split.prod.size())
    throw Error("invalid-spec", "schedule.periods must match the PROD window list");

  const std::vector<int> vintage_raw = extract_vintage(prepared, schema);
  ReplayContext ctx{prepared, schema,   split,
                    schedule, seed,     registry,
                    threads,  Eigen::VectorXi(), extract_labels(prepared, schema)};
  ctx.vintage.resize(static_cast<Eigen::Index>(vintage_raw.size()));
  for (std::size_t i = 0; i < vintage_raw.size(); ++i)
    ctx.vintage(static_cast<Eigen::Index>(i)) = vintage_raw[i];

  ReplayReport report;
  ChampionState state;
  std::optional<LiveChampion> champion;
  std::optional<LiveChampion> baseline;

  for (int period = 0; period < schedule.periods; ++period) {
    PeriodReport pr;
    pr.period = period;
    pr.otv_window = {split.otv.start + period * schedule.release_width,
                     split.otv.end + period * schedule.release_width};
    pr.prod_window = split.prod[static_cast<std::size_t>(period)];

    // The observation gap must hold for every release, not just the first.
    if (pr.otv_window.end + split.gap > pr.prod_window.start)
      throw Error("gap-violation", "period " + std::to_string(period) + ": OTV end " +
                                       std::to_string(pr.otv_window.end) + " + gap " +
                                       std::to_string(split.gap) + " exceeds PROD start " +
                                       std::to_string(pr.prod_window.start));

    const auto otv_rows = rows_in_window(ctx.vintage, pr.otv_window);
    if (otv_rows.empty())
      throw Error("empty-window", "period " + std::to_string(period) + " OTV window is empty");
    Eigen::VectorXd otv_labels(static_cast<Eigen::Index>(otv_rows.size()));
    for (Eigen::Index i = 0; i < otv_labels.size(); ++i)
      otv_labels(i) = ctx.labels(static_cast<Eigen::Index>(otv_rows[static_cast<std::size_t>(i)]));

    // Re-evaluate the incumbent on this period's OTV before any challenger.
    if (champion) {
      const Eigen::VectorXd scores = champion->pipeline.score(prepared, schema, otv_rows);
      state.score = auc(ScoredSample{scores, otv_labels, {}});
      pr.incumbent_refreshed_score = state.score;
    }

    const std::vector<Strategy> period_strategies =
        period == 0 ? std::vector<Strategy>{Strategy::FixedWindow} : schedule.strategies;

    for (Family family : schedule.families) {
      for (Strategy strategy : period_strategies) {
        CandidateResult candidate;
        try {
          candidate = build_candidate(ctx, period, family, strategy, pr.otv_window, otv_rows,
                                      state.run_id.value_or(""));
        } catch (const Error& e) {
          if (e.code() == "invalid-spec" || e.code() == "gap-violation") throw;
          candidate.family = family;
          candidate.strategy = strategy;
          candidate.failed = true;
          candidate.error_class = e.code();
          pr.candidates.push_back(std::move(candidate));
          continue;  // a failed candidate never competes
        }
        const bool promoted =
            state.consider(period, candidate.run_id, candidate.otv_objective, family, strategy);
        if (promoted) {
          champion = LiveChampion{registry.load_artifact(candidate.run_id), candidate.run_id};
          pr.promoted = true;
        }
        pr.candidates.push_back(std::move(candidate));
      }
    }

    if (!champion) throw Error("empty-candidates", "no candidate survived period " + std::to_string(period));

    if (period == 0) {
      baseline = champion;
      report.baseline_run_id = baseline->run_id;
    }

    pr.champion_run_id = *state.run_id;
    pr.champion_family = state.family;
    pr.champion_strategy = state.strategy;
    pr.champion_score = state.score;

    // Production scoring with the (possibly new) champion and the frozen
    // period-0 baseline.
    const auto prod_rows = rows_in_window(ctx.vintage, pr.prod_window);
    if (prod_rows.empty())
      throw Error("empty-window", "period " + std::to_string(period) + " PROD window is empty");
    Eigen::VectorXd prod_labels(static_cast<Eigen::Index>(prod_rows.size()));
    for (Eigen::Index i = 0; i < prod_labels.size(); ++i)
      prod_labels(i) = ctx.labels(static_cast<Eigen::Index>(prod_rows[static_cast<std::size_t>(i)]));

    pr.champion_prod = report_with_psi(champion->pipeline.score(prepared, schema, prod_rows),
                                       prod_labels, champion->pipeline.model.provenance);
    pr.baseline_prod = report_with_psi(baseline->pipeline.score(prepared, schema, prod_rows),
                                       prod_labels, baseline->pipeline.model.provenance);

    registry.append_lineage(period, pr.champion_run_id);
    report.periods.push_back(std::move(pr));
    if (on_period) on_period(report.periods.back());
  }

  report.promotions = state.history;
  return report;
}

// ------------------------------------------------------------- report JSON

json ReplayReport::to_json() const {
  json periods_json = json::array();
  for (const PeriodReport& pr : periods) {
    json candidates_json = json::array();
    for (const CandidateResult& c : pr.candidates) {
      json jc{{"family", to_string(c.family)},
              {"strategy", to_string(c.strategy)},
              {"window", json{{"start", c.window.train.start}, {"end", c.window.train.end}}},
              {"failed", c.failed}};
      if (c.failed) {
        jc["error_class"] = c.error_class;
      } else {
        jc["run_id"] = c.run_id;
        jc["otv_objective"] = c.otv_objective;
        jc["train"] = metric_report_to_json(c.train_metrics);
        jc["itv"] = metric_report_to_json(c.itv_metrics);
        jc["otv"] = metric_report_to_json(c.otv_metrics);
      }
      candidates_json.push_back(std::move(jc));
    }
    periods_json.push_back(
        json{{"period", pr.period},
             {"otv_window", json{{"start", pr.otv_window.start}, {"end", pr.otv_window.end}}},
             {"prod_window", json{{"start", pr.prod_window.start}, {"end", pr.prod_window.end}}},
             {"incumbent_refreshed_score", pr.incumbent_refreshed_score},
             {"candidates", std::move(candidates_json)},
             {"champion_run_id", pr.champion_run_id},
             {"champion_family", to_string(pr.champion_family)},
             {"champion_strategy", to_string(pr.champion_strategy)},
             {"promoted", pr.promoted},
             {"champion_score", pr.champion_score},
             {"champion_prod", metric_report_to_json(pr.champion_prod)},
             {"baseline_prod", metric_report_to_json(pr.baseline_prod)}});
  }
  json promotions_json = json::array();
  for (const auto& e : promotions)
    promotions_json.push_back(json{{"period", e.period},
                                   {"run_id", e.run_id},
                                   {"score", e.score},
                                   {"family", to_string(e.family)},
                                   {"strategy", to_string(e.strategy)}});
  return json{{"baseline_run_id", baseline_run_id},
              {"periods", std::move(periods_json)},
              {"promotions", std::move(promotions_json)}};
}

std::string ReplayReport::content_hash() const { return sha256_hex(to_json().dump()); }

std::map<std::string, double> ReplayReport::final_delta() const {
  std::map<std::string, double> delta;
  if (periods.empty()) return delta;
  const PeriodReport& last = periods.back();
  delta["auc"] = last.champion_prod.auc - last.baseline_prod.auc;
  delta["ks"] = last.champion_prod.ks - last.baseline_prod.ks;
  delta["f1"] = last.champion_prod.f1 - last.baseline_prod.f1;
  delta["3dcr"] = last.champion_prod.three_decile_capture - last.baseline_prod.three_decile_capture;
  return delta;
}

}  // namespace ccr
