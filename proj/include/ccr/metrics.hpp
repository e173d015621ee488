#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ccr {

struct ScoredSample {
  Eigen::VectorXd scores;
  Eigen::VectorXd labels;              // 0/1
  std::vector<std::string> groups;     // optional, for equal-opportunity

  void check() const;                  // equal lengths, finite scores
};

struct Confusion {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::int64_t total() const { return tp + fp + tn + fn; }
};

// Predicted positive iff score >= threshold. Error: empty-sample.
Confusion confusion(const ScoredSample& sample, double threshold);

// Pairwise concordance AUC with half credit for ties, computed by the rank
// method. Error: single-class.
double auc(const ScoredSample& sample);

// max over thresholds of |TPR - FPR|. Error: single-class.
double ks(const ScoredSample& sample);

double precision(const Confusion& c);
double recall(const Confusion& c);
double f1(const ScoredSample& sample, double threshold);  // 0 when TP == 0

// Fraction of all positives captured in the top ceil(0.3 n) rows by score
// (descending, stable input order on ties). Error: no-positives.
double three_decile_capture(const ScoredSample& sample);

// Population stability index between two score samples. Bin edges are the
// `bins`-quantiles of `expected`; proportions are floored at 1e-6.
double psi(const Eigen::VectorXd& expected_scores, const Eigen::VectorXd& actual_scores, int bins = 10);

// PSI over two pre-binned proportion vectors (same flooring rule).
double psi_from_proportions(const std::vector<double>& expected, const std::vector<double>& actual);

// Interior bin edges at the k/bins quantiles of the sample (bins-1 values).
std::vector<double> psi_bin_edges(const Eigen::VectorXd& scores, int bins);

// Bin proportions against precomputed interior edges; bin b covers
// (edge[b-1], edge[b]] with open outer bins.
std::vector<double> psi_proportions(const Eigen::VectorXd& scores, const std::vector<double>& edges);

// Max over group pairs of |TPR_a - TPR_b| at the threshold. Groups without a
// positive are skipped (recorded in `warnings`). Error: missing-groups when
// fewer than two usable groups remain.
double equal_opportunity_gap(const ScoredSample& sample, double threshold,
                             std::vector<std::string>* warnings = nullptr);

// Score threshold at which the predicted-positive fraction equals
// `target_rate` on the given scores (the train-bad-rate rule).
double rate_matching_threshold(const Eigen::VectorXd& scores, double target_rate);

struct MetricReport {
  double auc = 0.0;
  double ks = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double three_decile_capture = 0.0;
  std::optional<double> psi;
  std::optional<double> eo_gap;
  double threshold = 0.5;
};

// All ranking + thresholded metrics in one pass; PSI only when a reference
// score sample is supplied.
MetricReport evaluate_scores(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                             double threshold, const Eigen::VectorXd* psi_reference = nullptr,
                             int psi_bins = 10);

enum class MetricId { Auc, Ks, F1, ThreeDecileCapture };
MetricId metric_from_string(const std::string& s);
const char* to_string(MetricId id);

struct ImportanceReport {
  std::vector<std::string> names;
  Eigen::VectorXd scores;
  std::vector<int> ranks;  // permutation of 1..n, 1 = most important

  static ImportanceReport from_scores(std::vector<std::string> names, Eigen::VectorXd scores);
};

using Scorer = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

// Mean metric drop over `repeats` seeded within-column shuffles; negative
// drops are clipped at 0 for ranking. Error: metric-undefined-on-data,
// invalid-spec (repeats < 1).
ImportanceReport permutation_importance(const Scorer& scorer, const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const std::vector<std::string>& feature_names,
                                        MetricId metric, int repeats, std::uint64_t seed,
                                        double threshold = 0.5);

}  // namespace ccr
