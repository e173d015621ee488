#include "ccr/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "ccr/error.hpp"
#include "ccr/rng.hpp"

namespace ccr {

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(indices.size()));
  out.vintage.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(indices[i]);
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(src);
    out.y(static_cast<Eigen::Index>(i)) = y(src);
    out.vintage(static_cast<Eigen::Index>(i)) = vintage(src);
  }
  return out;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::FixedWindow: return "fixed-window";
    case Strategy::FixedOrigin: return "fixed-origin";
    case Strategy::RollingWindow: return "rolling-window";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "fixed-window") return Strategy::FixedWindow;
  if (s == "fixed-origin") return Strategy::FixedOrigin;
  if (s == "rolling-window") return Strategy::RollingWindow;
  throw Error("invalid-spec", "unknown strategy '" + s + "'");
}

void SplitSpec::validate() const {
  if (dev.start > dev.end || otv.start > otv.end)
    throw Error("invalid-spec", "window start exceeds end");
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw Error("invalid-spec", "train_fraction must lie in (0,1)");
  if (gap < 0) throw Error("invalid-spec", "gap must be >= 0");
  if (prod.empty()) throw Error("invalid-spec", "at least one PROD window required");
  int prev_end = otv.end;
  for (std::size_t i = 0; i < prod.size(); ++i) {
    if (prod[i].start > prod[i].end)
      throw Error("invalid-spec", "PROD window " + std::to_string(i) + " start exceeds end");
    if (i > 0 && prod[i].start <= prev_end)
      throw Error("invalid-spec", "PROD windows must be non-overlapping and increasing");
    if (i > 0) prev_end = prod[i].end;
  }
  if (otv.end + gap > prod.front().start)
    throw Error("gap-violation", "OTV ends month " + std::to_string(otv.end) + ", gap " +
                                     std::to_string(gap) + " exceeds PROD start " +
                                     std::to_string(prod.front().start));
  prev_end = prod.front().end;
  for (std::size_t i = 1; i < prod.size(); ++i) prev_end = prod[i].end;
}

WindowSpec window_for(Strategy strategy, const MonthWindow& dev, int iteration, int release_width) {
  if (iteration < 0) throw Error("invalid-spec", "iteration must be >= 0");
  if (release_width < 1) throw Error("invalid-spec", "release width must be >= 1");
  WindowSpec w;
  w.strategy = strategy;
  w.iteration = iteration;
  const int shift = iteration * release_width;
  switch (strategy) {
    case Strategy::FixedWindow: w.train = dev; break;
    case Strategy::FixedOrigin: w.train = {dev.start, dev.end + shift}; break;
    case Strategy::RollingWindow: w.train = {dev.start + shift, dev.end + shift}; break;
  }
  return w;
}

std::vector<std::size_t> rows_in_window(const Eigen::VectorXi& vintage, const MonthWindow& window) {
  std::vector<std::size_t> out;
  for (Eigen::Index i = 0; i < vintage.size(); ++i)
    if (window.contains(vintage(i))) out.push_back(static_cast<std::size_t>(i));
  return out;
}

std::vector<std::size_t> stratified_sample(const Eigen::VectorXd& labels,
                                           std::span<const std::size_t> pool, double fraction,
                                           std::uint64_t seed) {
  std::vector<std::size_t> classes[2];
  for (std::size_t idx : pool) classes[labels(static_cast<Eigen::Index>(idx)) > 0.5 ? 1 : 0].push_back(idx);

  const auto total_take =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
  std::size_t take[2];
  double frac_part[2];
  std::size_t floor_sum = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = fraction * static_cast<double>(classes[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    frac_part[c] = exact - static_cast<double>(take[c]);
    floor_sum += take[c];
  }
  // Largest remainder: hand out the rounding slack so the overall count is hit.
  std::size_t remaining = total_take > floor_sum ? total_take - floor_sum : 0;
  const int order[2] = {frac_part[1] > frac_part[0] ? 1 : 0, frac_part[1] > frac_part[0] ? 0 : 1};
  for (int k = 0; k < 2 && remaining > 0; ++k) {
    const int c = order[k];
    if (take[c] < classes[c].size()) {
      ++take[c];
      --remaining;
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> selected;
  selected.reserve(total_take);
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span<std::size_t>(classes[c]));
    selected.insert(selected.end(), classes[c].begin(), classes[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

SplitIndices split_indices(const Eigen::VectorXi& vintage, const Eigen::VectorXd& labels,
                           const SplitSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitIndices out;

  const auto dev_rows = rows_in_window(vintage, spec.dev);
  if (dev_rows.empty()) throw Error("empty-window", "dev window has no rows");

  out.train = stratified_sample(labels, dev_rows, spec.train_fraction, seed);
  std::vector<char> in_train(static_cast<std::size_t>(vintage.size()), 0);
  for (std::size_t idx : out.train) in_train[idx] = 1;
  for (std::size_t idx : dev_rows)
    if (!in_train[idx]) out.itv.push_back(idx);

  out.otv = rows_in_window(vintage, spec.otv);
  if (out.otv.empty()) throw Error("empty-window", "OTV window has no rows");

  for (std::size_t i = 0; i < spec.prod.size(); ++i) {
    auto rows = rows_in_window(vintage, spec.prod[i]);
    if (rows.empty()) throw Error("empty-window", "PROD window " + std::to_string(i) + " has no rows");
    out.prod.push_back(std::move(rows));
  }
  return out;
}

Splits split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed) {
  const SplitIndices idx = split_indices(data.vintage, data.y, spec, seed);
  Splits out;
  out.train = data.select(idx.train);
  out.itv = data.select(idx.itv);
  out.otv = data.select(idx.otv);
  for (const auto& rows : idx.prod) out.prod.push_back(data.select(rows));
  return out;
}

Dataset train_slice(const Dataset& data, const WindowSpec& window) {
  const auto rows = rows_in_window(data.vintage, window.train);
  if (rows.empty())
    throw Error("empty-slice", "train window [" + std::to_string(window.train.start) + "," +
                                   std::to_string(window.train.end) + "] has no rows");
  return data.select(rows);
}

}  // namespace ccr
