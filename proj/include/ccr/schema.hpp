#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ccr {

enum class ColumnRole {
  FeatureNumeric,
  FeatureCategorical,
  FeatureDate,
  Label,
  VintageDate,
  LeakageDrop,
  Identifier,
};

const char* to_string(ColumnRole role);

// Declares every column of the input file exactly once. Feature-date columns
// are converted to day counts against reference_date before any fitting.
struct ColumnSchema {
  struct Entry {
    std::string name;
    ColumnRole role;
  };

  std::vector<Entry> columns;
  std::string reference_date;                // column name used by date_to_days
  std::optional<std::string> vintage_origin; // "YYYY-MM"; required when the
                                             // vintage column holds dates

  // Throws Error("invalid-schema") unless there is exactly one label column,
  // exactly one vintage column, and no duplicate names.
  void validate() const;

  std::optional<ColumnRole> role_of(const std::string& name) const;
  std::string label_column() const;
  std::string vintage_column() const;
  std::vector<std::string> columns_with_role(ColumnRole role) const;
};

}  // namespace ccr
