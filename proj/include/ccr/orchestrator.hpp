#pragma once

#include <nlohmann/json_fwd.hpp>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ccr/registry.hpp"
#include "ccr/tuner.hpp"

namespace ccr {

struct ReplaySchedule {
  int periods = 12;
  int release_width = 1;  // months of new data per period
  std::vector<Family> families = {Family::LR, Family::RF, Family::GBT, Family::MLP};
  std::vector<Strategy> strategies = {Strategy::FixedOrigin, Strategy::RollingWindow};
  std::map<std::string, int> tune_budgets;         // by family name; default per tuner
  std::map<std::string, SearchSpace> search_spaces;  // by family name; default per tuner
  int psi_bins = 10;

  int budget_for(Family family) const;
  const SearchSpace* space_for(Family family) const;
  void validate() const;  // Error: invalid-spec
};

// The reigning model and its score, per the promotion loop: a challenger
// replaces the champion only on a strictly greater score.
struct ChampionState {
  std::optional<std::string> run_id;
  Family family = Family::LR;
  Strategy strategy = Strategy::FixedWindow;
  double score = 0.0;  // S*; 0 while no champion exists

  struct Event {
    int period;
    std::string run_id;
    double score;
    Family family;
    Strategy strategy;
  };
  std::vector<Event> history;  // append-only promotions

  bool has_champion() const { return run_id.has_value(); }

  // Applies the strict-inequality rule; returns true on promotion.
  bool consider(int period, const std::string& candidate_run_id, double candidate_score,
                Family candidate_family, Strategy candidate_strategy);
};

double objective(const MetricReport& report);  // the OTV AUC projection

// Argmax objective with ties resolved to the earliest candidate (callers pass
// candidates in family order). Error: empty-candidates.
std::size_t select_initial_champion(const std::vector<double>& objectives);

struct CandidateResult {
  Family family = Family::LR;
  Strategy strategy = Strategy::FixedWindow;
  WindowSpec window;
  bool failed = false;
  std::string error_class;
  std::string run_id;
  double otv_objective = 0.0;
  MetricReport train_metrics;
  MetricReport itv_metrics;
  MetricReport otv_metrics;
};

struct PeriodReport {
  int period = 0;
  MonthWindow otv_window;
  MonthWindow prod_window;
  double incumbent_refreshed_score = 0.0;  // S* after re-evaluation on this OTV
  std::vector<CandidateResult> candidates;
  std::string champion_run_id;
  Family champion_family = Family::LR;
  Strategy champion_strategy = Strategy::FixedWindow;
  bool promoted = false;
  double champion_score = 0.0;             // S* at period end
  MetricReport champion_prod;
  MetricReport baseline_prod;
};

struct ReplayReport {
  std::vector<PeriodReport> periods;
  std::string baseline_run_id;
  std::vector<ChampionState::Event> promotions;

  nlohmann::json to_json() const;
  std::string content_hash() const;

  // champion minus baseline on the final period, keyed by metric name.
  std::map<std::string, double> final_delta() const;
};

// Runs the full champion-challenger replay over `schedule.periods` production
// windows. Period 0 picks the initial champion among fixed-window candidates;
// later periods rebuild challengers per family x strategy, re-evaluate the
// incumbent on the fresh OTV, promote on strict improvement, and score the
// PROD slice with both the champion and the frozen period-0 baseline.
// All randomness derives from `seed` via named sub-streams. `on_period`, when
// set, fires after each completed period (callers use it to name the last
// completed period on partial failure).
ReplayReport replay(const RawTable& prepared, const ColumnSchema& schema, const SplitSpec& split,
                    const ReplaySchedule& schedule, std::uint64_t seed, Registry& registry,
                    int threads = 1,
                    const std::function<void(const PeriodReport&)>& on_period = {});

}  // namespace ccr
