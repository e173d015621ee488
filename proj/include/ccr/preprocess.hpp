#pragma once

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccr/dataset.hpp"
#include "ccr/schema.hpp"
#include "ccr/table.hpp"

namespace ccr {

// Replaces date_col with the day difference (date_col - ref_col) as an
// integer; missing dates stay missing. Accepts YYYY-MM-DD and YYYY-MM.
// Error: unparseable-date (row and value reported).
RawTable date_to_days(const RawTable& table, const std::string& date_col, const std::string& ref_col);

// Removes every leakage-drop column present; absent ones are recorded in
// `warnings` and skipped. Survivor order is preserved.
RawTable drop_leakage(const RawTable& table, const ColumnSchema& schema,
                      std::vector<std::string>* warnings = nullptr);

// date_to_days for every feature-date column, then drop_leakage, then drops
// the reference-date column if it carries no other role.
RawTable prepare_table(const RawTable& table, const ColumnSchema& schema,
                       std::vector<std::string>* warnings = nullptr);

// Train-only transformation state. Numeric statistics are computed over the
// observed (non-missing) train cells; a missing cell maps to exactly 0 in the
// standardized output with its flag set. Vocabularies keep categories whose
// train frequency is >= 1%; everything else folds into "Others".
struct PreprocessPlan {
  struct Column {
    std::string name;
    bool categorical = false;
    double mean = 0.0;
    double stddev = 0.0;                // 0 for constant columns: output is all zeros
    std::vector<std::string> vocab;     // retained categories, sorted
    bool has_flag = false;              // >=1 missing cell on train
  };

  std::vector<Column> columns;          // source feature columns, table order
  std::size_t train_rows = 0;

  // Output layout: per source column its block (numeric: one column;
  // categorical: one indicator per vocab entry plus "Others"), then one
  // missing flag per flagged source column, in source order.
  std::vector<std::string> feature_names() const;
  Eigen::Index feature_count() const;

  nlohmann::json to_json() const;
  static PreprocessPlan from_json(const nlohmann::json& j);
};

inline constexpr double kRareCategoryThreshold = 0.01;  // strictly below 1% folds to Others
inline constexpr const char* kOthersCategory = "Others";

// Fits a plan on the given train rows only. Error: empty-train.
PreprocessPlan fit_preprocess(const RawTable& table, const ColumnSchema& schema,
                              std::span<const std::size_t> train_rows);
PreprocessPlan fit_preprocess(const RawTable& table, const ColumnSchema& schema);

// Applies a fitted plan to the given rows and assembles the Dataset
// (features, labels, vintage). Errors: unknown-column, unparseable-number,
// bad-label, unparseable-vintage.
Dataset apply_preprocess(const RawTable& table, const ColumnSchema& schema,
                         const PreprocessPlan& plan, std::span<const std::size_t> rows);
Dataset apply_preprocess(const RawTable& table, const ColumnSchema& schema,
                         const PreprocessPlan& plan);

// Month index per row, 0-based from the dataset origin. Integer cells are
// taken as month indices directly; date cells require schema.vintage_origin.
std::vector<int> extract_vintage(const RawTable& table, const ColumnSchema& schema);

Eigen::VectorXd extract_labels(const RawTable& table, const ColumnSchema& schema);

}  // namespace ccr
