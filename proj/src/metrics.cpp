#include "ccr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ccr/error.hpp"
#include "ccr/rng.hpp"

namespace ccr {

namespace {

void require_both_classes(const Eigen::VectorXd& labels) {
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < labels.size(); ++i) (labels(i) > 0.5 ? pos : neg) = true;
  if (!pos || !neg) throw Error("single-class", "both classes required");
}

std::vector<std::size_t> order_by_score_desc(const Eigen::VectorXd& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

}  // namespace

void ScoredSample::check() const {
  if (scores.size() != labels.size())
    throw Error("invalid-sample", "scores and labels differ in length");
  if (!groups.empty() && static_cast<Eigen::Index>(groups.size()) != scores.size())
    throw Error("invalid-sample", "group tags differ in length");
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (!std::isfinite(scores(i))) throw Error("invalid-sample", "non-finite score");
}

Confusion confusion(const ScoredSample& sample, double threshold) {
  sample.check();
  if (sample.scores.size() == 0) throw Error("empty-sample", "no rows");
  if (!std::isfinite(threshold)) throw Error("invalid-spec", "threshold must be finite");
  Confusion c;
  for (Eigen::Index i = 0; i < sample.scores.size(); ++i) {
    const bool predicted = sample.scores(i) >= threshold;
    const bool actual = sample.labels(i) > 0.5;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double auc(const ScoredSample& sample) {
  sample.check();
  require_both_classes(sample.labels);
  const Eigen::Index n = sample.scores.size();

  // Rank method with midranks for ties; equals pairwise concordance exactly.
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.scores(static_cast<Eigen::Index>(a)) < sample.scores(static_cast<Eigen::Index>(b));
  });

  double rank_sum_pos = 0.0;
  std::int64_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           sample.scores(static_cast<Eigen::Index>(order[j + 1])) ==
               sample.scores(static_cast<Eigen::Index>(order[i])))
      ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (sample.labels(static_cast<Eigen::Index>(order[k])) > 0.5) {
        rank_sum_pos += midrank;
        ++positives;
      }
    }
    i = j + 1;
  }
  const std::int64_t negatives = n - positives;
  const double p = static_cast<double>(positives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

double ks(const ScoredSample& sample) {
  sample.check();
  require_both_classes(sample.labels);
  const auto order = order_by_score_desc(sample.scores);

  std::int64_t total_pos = 0;
  for (Eigen::Index i = 0; i < sample.labels.size(); ++i)
    if (sample.labels(i) > 0.5) ++total_pos;
  const std::int64_t total_neg = sample.labels.size() - total_pos;

  double best = 0.0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // Sweep whole tie groups: the threshold sits at the group's score.
    const double s = sample.scores(static_cast<Eigen::Index>(order[i]));
    while (i < order.size() && sample.scores(static_cast<Eigen::Index>(order[i])) == s) {
      if (sample.labels(static_cast<Eigen::Index>(order[i])) > 0.5) ++tp;
      else ++fp;
      ++i;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(total_neg);
    best = std::max(best, std::abs(tpr - fpr));
  }
  return best;
}

double precision(const Confusion& c) {
  return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const Confusion& c) {
  return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double f1(const ScoredSample& sample, double threshold) {
  const Confusion c = confusion(sample, threshold);
  if (c.tp == 0) return 0.0;
  const double p = precision(c);
  const double r = recall(c);
  return 2.0 * p * r / (p + r);
}

double three_decile_capture(const ScoredSample& sample) {
  sample.check();
  std::int64_t total_pos = 0;
  for (Eigen::Index i = 0; i < sample.labels.size(); ++i)
    if (sample.labels(i) > 0.5) ++total_pos;
  if (total_pos == 0) throw Error("no-positives", "capture rate undefined");

  const auto order = order_by_score_desc(sample.scores);
  const std::size_t top =
      static_cast<std::size_t>(std::ceil(0.3 * static_cast<double>(order.size())));
  std::int64_t captured = 0;
  for (std::size_t i = 0; i < top; ++i)
    if (sample.labels(static_cast<Eigen::Index>(order[i])) > 0.5) ++captured;
  return static_cast<double>(captured) / static_cast<double>(total_pos);
}

double psi_from_proportions(const std::vector<double>& expected, const std::vector<double>& actual) {
  if (expected.size() != actual.size()) throw Error("invalid-spec", "bin count mismatch");
  double total = 0.0;
  for (std::size_t b = 0; b < expected.size(); ++b) {
    const double e = std::max(expected[b], 1e-6);
    const double a = std::max(actual[b], 1e-6);
    total += (a - e) * std::log(a / e);
  }
  return total;
}

std::vector<double> psi_bin_edges(const Eigen::VectorXd& scores, int bins) {
  if (scores.size() == 0) throw Error("empty-sample", "no scores to bin");
  if (bins < 2) throw Error("invalid-spec", "psi needs >= 2 bins");
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end());
  // Interior edges at the k/bins quantiles; the outer bins are open-ended.
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) {
    const std::size_t pos = std::min(
        sorted.size() - 1,
        static_cast<std::size_t>(static_cast<double>(k) * static_cast<double>(sorted.size()) /
                                 static_cast<double>(bins)));
    edges.push_back(sorted[pos]);
  }
  return edges;
}

std::vector<double> psi_proportions(const Eigen::VectorXd& scores, const std::vector<double>& edges) {
  if (scores.size() == 0) throw Error("empty-sample", "no scores to bin");
  std::vector<double> prop(edges.size() + 1, 0.0);
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), scores(i));
    prop[static_cast<std::size_t>(it - edges.begin())] += 1.0;
  }
  for (auto& v : prop) v /= static_cast<double>(scores.size());
  return prop;
}

double psi(const Eigen::VectorXd& expected_scores, const Eigen::VectorXd& actual_scores, int bins) {
  if (expected_scores.size() == 0 || actual_scores.size() == 0)
    throw Error("empty-sample", "psi needs both samples non-empty");
  const auto edges = psi_bin_edges(expected_scores, bins);
  return psi_from_proportions(psi_proportions(expected_scores, edges),
                              psi_proportions(actual_scores, edges));
}

double equal_opportunity_gap(const ScoredSample& sample, double threshold,
                             std::vector<std::string>* warnings) {
  sample.check();
  if (sample.groups.empty()) throw Error("missing-groups", "no group tags supplied");

  struct GroupCounts {
    std::int64_t tp = 0, fn = 0;
  };
  std::map<std::string, GroupCounts> by_group;
  for (Eigen::Index i = 0; i < sample.scores.size(); ++i) {
    if (sample.labels(i) <= 0.5) continue;
    auto& g = by_group[sample.groups[static_cast<std::size_t>(i)]];
    if (sample.scores(i) >= threshold) ++g.tp;
    else ++g.fn;
  }

  std::vector<double> tprs;
  for (const auto& [name, counts] : by_group) {
    if (counts.tp + counts.fn == 0) {
      if (warnings) warnings->push_back("group '" + name + "' has no positives; skipped");
      continue;
    }
    tprs.push_back(static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fn));
  }
  if (tprs.size() < 2) throw Error("missing-groups", "fewer than two groups with positives");
  const auto [lo, hi] = std::minmax_element(tprs.begin(), tprs.end());
  return *hi - *lo;
}

double rate_matching_threshold(const Eigen::VectorXd& scores, double target_rate) {
  if (scores.size() == 0) throw Error("empty-sample", "no scores");
  std::vector<double> sorted(scores.data(), scores.data() + scores.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const auto n = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::llround(target_rate * n));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

MetricReport evaluate_scores(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                             double threshold, const Eigen::VectorXd* psi_reference, int psi_bins) {
  ScoredSample sample{scores, labels, {}};
  MetricReport report;
  report.threshold = threshold;
  report.auc = auc(sample);
  report.ks = ks(sample);
  const Confusion c = confusion(sample, threshold);
  report.precision = precision(c);
  report.recall = recall(c);
  report.f1 = f1(sample, threshold);
  report.three_decile_capture = three_decile_capture(sample);
  if (psi_reference != nullptr) report.psi = psi(*psi_reference, scores, psi_bins);
  return report;
}

MetricId metric_from_string(const std::string& s) {
  if (s == "auc") return MetricId::Auc;
  if (s == "ks") return MetricId::Ks;
  if (s == "f1") return MetricId::F1;
  if (s == "3dcr") return MetricId::ThreeDecileCapture;
  throw Error("invalid-spec", "unknown metric '" + s + "'");
}

const char* to_string(MetricId id) {
  switch (id) {
    case MetricId::Auc: return "auc";
    case MetricId::Ks: return "ks";
    case MetricId::F1: return "f1";
    case MetricId::ThreeDecileCapture: return "3dcr";
  }
  return "?";
}

ImportanceReport ImportanceReport::from_scores(std::vector<std::string> names,
                                               Eigen::VectorXd scores) {
  ImportanceReport report;
  report.names = std::move(names);
  report.scores = std::move(scores);
  std::vector<std::size_t> order(static_cast<std::size_t>(report.scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.scores(static_cast<Eigen::Index>(a)) > report.scores(static_cast<Eigen::Index>(b));
  });
  report.ranks.assign(order.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    report.ranks[order[pos]] = static_cast<int>(pos) + 1;
  return report;
}

namespace {

double metric_value(MetricId metric, const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                    double threshold) {
  const ScoredSample sample{scores, labels, {}};
  switch (metric) {
    case MetricId::Auc: return auc(sample);
    case MetricId::Ks: return ks(sample);
    case MetricId::F1: return f1(sample, threshold);
    case MetricId::ThreeDecileCapture: return three_decile_capture(sample);
  }
  throw Error("invalid-spec", "bad metric id");
}

}  // namespace

ImportanceReport permutation_importance(const Scorer& scorer, const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const std::vector<std::string>& feature_names,
                                        MetricId metric, int repeats, std::uint64_t seed,
                                        double threshold) {
  if (repeats < 1) throw Error("invalid-spec", "repeats must be >= 1");
  double baseline;
  try {
    baseline = metric_value(metric, scorer(X), y, threshold);
  } catch (const Error& e) {
    throw Error("metric-undefined-on-data", e.what());
  }

  Eigen::VectorXd drops(X.cols());
  Eigen::MatrixXd shuffled = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    double total = 0.0;
    for (int rep = 0; rep < repeats; ++rep) {
      Rng rng(sub_seed(seed, "permutation", static_cast<std::uint64_t>(j),
                       std::to_string(rep)));
      std::vector<std::size_t> perm(static_cast<std::size_t>(X.rows()));
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(perm));
      for (Eigen::Index i = 0; i < X.rows(); ++i)
        shuffled(i, j) = X(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]), j);
      total += baseline - metric_value(metric, scorer(shuffled), y, threshold);
    }
    shuffled.col(j) = X.col(j);
    drops(j) = total / static_cast<double>(repeats);
  }

  Eigen::VectorXd clipped = drops.cwiseMax(0.0);
  return ImportanceReport::from_scores(feature_names, std::move(clipped));
}

}  // namespace ccr
