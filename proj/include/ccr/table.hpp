#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ccr {

struct ColumnSchema;

// Rectangular text table. A cell equal to "" is a missing value; the CSV
// layer maps empty (or empty-quoted) fields to "".
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t row_count() const { return rows.size(); }
  std::size_t column_count() const { return columns.size(); }

  // Index of a named column; throws Error("unknown-column") if absent.
  std::size_t column_index(const std::string& name) const;
  bool has_column(const std::string& name) const;

  // New table keeping only the given row indices, in the given order.
  RawTable select_rows(std::span<const std::size_t> indices) const;
};

// RFC 4180 parsing: quoted fields, escaped quotes, embedded separators and
// newlines. Rows must all match the header width (Error "ragged-row").
RawTable parse_csv(const std::string& text);
RawTable read_csv(const std::filesystem::path& path);
void write_csv(const RawTable& table, const std::filesystem::path& path);
std::string to_csv(const RawTable& table);

// Reads a CSV file and checks the header against the schema: every file
// column must be declared, and every declared column except leakage-drop
// must be present. Errors: missing-file, header-mismatch, ragged-row.
RawTable load_table(const std::filesystem::path& path, const ColumnSchema& schema);

}  // namespace ccr
