#include "ccr/schema.hpp"

#include <set>

#include "ccr/error.hpp"

namespace ccr {

const char* to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::FeatureNumeric: return "feature-numeric";
    case ColumnRole::FeatureCategorical: return "feature-categorical";
    case ColumnRole::FeatureDate: return "feature-date";
    case ColumnRole::Label: return "label";
    case ColumnRole::VintageDate: return "vintage-date";
    case ColumnRole::LeakageDrop: return "leakage-drop";
    case ColumnRole::Identifier: return "identifier";
  }
  return "?";
}

void ColumnSchema::validate() const {
  std::set<std::string> seen;
  int labels = 0;
  int vintages = 0;
  for (const auto& entry : columns) {
    if (!seen.insert(entry.name).second)
      throw Error("invalid-schema", "duplicate column '" + entry.name + "'");
    if (entry.role == ColumnRole::Label) ++labels;
    if (entry.role == ColumnRole::VintageDate) ++vintages;
  }
  if (labels != 1)
    throw Error("invalid-schema", "expected exactly one label column, found " + std::to_string(labels));
  if (vintages != 1)
    throw Error("invalid-schema",
                "expected exactly one vintage-date column, found " + std::to_string(vintages));
}

std::optional<ColumnRole> ColumnSchema::role_of(const std::string& name) const {
  for (const auto& entry : columns)
    if (entry.name == name) return entry.role;
  return std::nullopt;
}

std::string ColumnSchema::label_column() const {
  for (const auto& entry : columns)
    if (entry.role == ColumnRole::Label) return entry.name;
  throw Error("invalid-schema", "no label column");
}

std::string ColumnSchema::vintage_column() const {
  for (const auto& entry : columns)
    if (entry.role == ColumnRole::VintageDate) return entry.name;
  throw Error("invalid-schema", "no vintage-date column");
}

std::vector<std::string> ColumnSchema::columns_with_role(ColumnRole role) const {
  std::vector<std::string> out;
  for (const auto& entry : columns)
    if (entry.role == role) out.push_back(entry.name);
  return out;
}

}  // namespace ccr
