#include "ccr/table.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ccr/error.hpp"
#include "ccr/schema.hpp"

namespace ccr {

std::size_t RawTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error("unknown-column", "no column named '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

bool RawTable::has_column(const std::string& name) const {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

RawTable RawTable::select_rows(std::span<const std::size_t> indices) const {
  RawTable out;
  out.columns = columns;
  out.rows.reserve(indices.size());
  for (std::size_t i : indices) out.rows.push_back(rows.at(i));
  return out;
}

namespace {

// One pass over the whole buffer; handles CRLF and a missing final newline.
std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any_char = false;

  const auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  const auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
    any_char = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any_char = true;
        break;
      case ',':
        end_field();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        any_char = true;
        break;
    }
  }
  if (any_char || !field.empty() || !record.empty()) end_record();
  return records;
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace

RawTable parse_csv(const std::string& text) {
  auto records = parse_records(text);
  if (records.empty()) throw Error("empty-file", "no header row");
  RawTable table;
  table.columns = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.columns.size()) {
      throw Error("ragged-row", "row " + std::to_string(r) + " has " +
                                    std::to_string(records[r].size()) + " cells, expected " +
                                    std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

RawTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing-file", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string to_csv(const RawTable& table) {
  std::string out;
  const auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out.push_back(',');
      const std::string& cell = cells[c];
      if (needs_quoting(cell)) {
        out.push_back('"');
        for (char ch : cell) {
          if (ch == '"') out.push_back('"');
          out.push_back(ch);
        }
        out.push_back('"');
      } else {
        out += cell;
      }
    }
    out.push_back('\n');
  };
  emit_row(table.columns);
  for (const auto& row : table.rows) emit_row(row);
  return out;
}

void write_csv(const RawTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("unwritable-store", "cannot write " + path.string());
  out << to_csv(table);
}

RawTable load_table(const std::filesystem::path& path, const ColumnSchema& schema) {
  if (!std::filesystem::exists(path)) throw Error("missing-file", path.string() + " does not exist");
  RawTable table = read_csv(path);

  std::vector<std::string> missing;
  for (const auto& entry : schema.columns) {
    if (entry.role == ColumnRole::LeakageDrop) continue;  // may legitimately be absent
    if (!table.has_column(entry.name)) missing.push_back(entry.name);
  }
  std::vector<std::string> undeclared;
  for (const auto& name : table.columns) {
    if (!schema.role_of(name)) undeclared.push_back(name);
  }
  if (!missing.empty() || !undeclared.empty()) {
    std::string what;
    if (!missing.empty()) {
      what += "missing columns:";
      for (const auto& n : missing) what += " " + n;
    }
    if (!undeclared.empty()) {
      if (!what.empty()) what += "; ";
      what += "undeclared columns:";
      for (const auto& n : undeclared) what += " " + n;
    }
    throw Error("header-mismatch", what);
  }
  return table;
}

}  // namespace ccr
