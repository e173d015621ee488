#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ccr {

// Fully numeric, missing-free design matrix with a binary label and a
// 0-based month index per row. Immutable after construction by convention.
struct Dataset {
  Eigen::MatrixXd X;                       // rows x features
  Eigen::VectorXd y;                       // 0/1
  Eigen::VectorXi vintage;                 // month index per row
  std::vector<std::string> feature_names;  // size == X.cols()

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  double bad_rate() const { return rows() == 0 ? 0.0 : y.mean(); }

  Dataset select(std::span<const std::size_t> indices) const;
};

// Inclusive month window [start, end].
struct MonthWindow {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool contains(int month) const { return month >= start && month <= end; }
  bool operator==(const MonthWindow&) const = default;
};

struct SplitSpec {
  MonthWindow dev;
  double train_fraction = 0.75;
  MonthWindow otv;
  std::vector<MonthWindow> prod;
  int gap = 0;  // label observation gap in months

  // Enforces otv.end + gap <= prod.front().start and that prod windows are
  // non-overlapping and increasing. Errors: invalid-spec, gap-violation.
  void validate() const;
};

enum class Strategy { FixedWindow, FixedOrigin, RollingWindow };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct WindowSpec {
  Strategy strategy = Strategy::FixedWindow;
  MonthWindow train;
  int iteration = 0;

  bool operator==(const WindowSpec&) const = default;
};

// Window algebra: with dev window [origin, dev_end] and release width w,
//   fixed-window  -> [origin, dev_end]
//   fixed-origin  -> [origin, dev_end + i*w]
//   rolling       -> [origin + i*w, dev_end + i*w]
WindowSpec window_for(Strategy strategy, const MonthWindow& dev, int iteration, int release_width);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> itv;
  std::vector<std::size_t> otv;
  std::vector<std::vector<std::size_t>> prod;
};

struct Splits {
  Dataset train;
  Dataset itv;
  Dataset otv;
  std::vector<Dataset> prod;
};

// Row indices whose vintage falls inside the window, in row order.
std::vector<std::size_t> rows_in_window(const Eigen::VectorXi& vintage, const MonthWindow& window);

// Seeded, label-stratified partition of the dev rows into train/ITV at
// train_fraction, plus pure time slices for OTV and each PROD window.
// |train| is within one row of train_fraction * |dev|.
// Errors: empty-window (named), gap-violation.
SplitIndices split_indices(const Eigen::VectorXi& vintage, const Eigen::VectorXd& labels,
                           const SplitSpec& spec, std::uint64_t seed);

Splits split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed);

// Rows whose vintage falls in the window's train range. Error: empty-slice.
Dataset train_slice(const Dataset& data, const WindowSpec& window);

// Seeded stratified subset of size round(fraction * n) per label class,
// assembled with largest-remainder rounding so the total matches the overall
// fraction within one row. Returns selected indices sorted ascending.
std::vector<std::size_t> stratified_sample(const Eigen::VectorXd& labels,
                                           std::span<const std::size_t> pool, double fraction,
                                           std::uint64_t seed);

}  // namespace ccr
