#include "ccr/preprocess.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "ccr/error.hpp"

namespace ccr {

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && !s.empty() && std::isfinite(out);
}

bool parse_int(const std::string& s, long& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// YYYY-MM-DD or YYYY-MM (day defaults to 1).
std::optional<std::chrono::sys_days> parse_date(const std::string& s) {
  long y = 0, m = 0, d = 1;
  const auto first = s.find('-');
  if (first == std::string::npos) return std::nullopt;
  const auto second = s.find('-', first + 1);
  if (!parse_int(s.substr(0, first), y)) return std::nullopt;
  if (second == std::string::npos) {
    if (!parse_int(s.substr(first + 1), m)) return std::nullopt;
  } else {
    if (!parse_int(s.substr(first + 1, second - first - 1), m)) return std::nullopt;
    if (!parse_int(s.substr(second + 1), d)) return std::nullopt;
  }
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days(ymd);
}

std::optional<std::pair<int, int>> parse_year_month(const std::string& s) {
  long y = 0, m = 0;
  const auto dash = s.find('-');
  if (dash == std::string::npos) return std::nullopt;
  if (!parse_int(s.substr(0, dash), y)) return std::nullopt;
  std::string rest = s.substr(dash + 1);
  const auto second = rest.find('-');
  if (second != std::string::npos) rest = rest.substr(0, second);
  if (!parse_int(rest, m) || m < 1 || m > 12) return std::nullopt;
  return std::make_pair(static_cast<int>(y), static_cast<int>(m));
}

std::vector<std::size_t> all_rows(const RawTable& table) {
  std::vector<std::size_t> rows(table.row_count());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

RawTable date_to_days(const RawTable& table, const std::string& date_col, const std::string& ref_col) {
  const std::size_t dc = table.column_index(date_col);
  const std::size_t rc = table.column_index(ref_col);
  RawTable out = table;
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    std::string& cell = out.rows[r][dc];
    if (cell.empty()) continue;  // missing stays missing
    const auto date = parse_date(cell);
    if (!date) throw Error("unparseable-date", "row " + std::to_string(r) + ": '" + cell + "'");
    const std::string& ref_cell = table.rows[r][rc];
    const auto ref = parse_date(ref_cell);
    if (!ref) throw Error("unparseable-date", "row " + std::to_string(r) + ": '" + ref_cell + "'");
    cell = std::to_string((*date - *ref).count());
  }
  return out;
}

RawTable drop_leakage(const RawTable& table, const ColumnSchema& schema,
                      std::vector<std::string>* warnings) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto role = schema.role_of(table.columns[c]);
    if (role && *role == ColumnRole::LeakageDrop) continue;
    keep.push_back(c);
  }
  if (warnings) {
    for (const auto& name : schema.columns_with_role(ColumnRole::LeakageDrop))
      if (!table.has_column(name)) warnings->push_back("leakage column '" + name + "' not in table");
  }
  RawTable out;
  for (std::size_t c : keep) out.columns.push_back(table.columns[c]);
  out.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<std::string> cells;
    cells.reserve(keep.size());
    for (std::size_t c : keep) cells.push_back(row[c]);
    out.rows.push_back(std::move(cells));
  }
  return out;
}

RawTable prepare_table(const RawTable& table, const ColumnSchema& schema,
                       std::vector<std::string>* warnings) {
  RawTable out = table;
  for (const auto& name : schema.columns_with_role(ColumnRole::FeatureDate)) {
    if (!out.has_column(name)) continue;
    out = date_to_days(out, name, schema.reference_date);
  }
  out = drop_leakage(out, schema, warnings);
  // The reference date column is consumed by the conversion unless it also
  // carries a feature/label/vintage role of its own.
  if (!schema.reference_date.empty() && out.has_column(schema.reference_date)) {
    const auto role = schema.role_of(schema.reference_date);
    if (role && *role == ColumnRole::Identifier) {
      ColumnSchema ref_only;
      ref_only.columns.push_back({schema.reference_date, ColumnRole::LeakageDrop});
      out = drop_leakage(out, ref_only, nullptr);
    }
  }
  return out;
}

std::vector<std::string> PreprocessPlan::feature_names() const {
  std::vector<std::string> names;
  for (const auto& col : columns) {
    if (!col.categorical) {
      names.push_back(col.name);
    } else {
      for (const auto& cat : col.vocab) names.push_back(col.name + "=" + cat);
      names.push_back(col.name + "=" + kOthersCategory);
    }
  }
  for (const auto& col : columns)
    if (col.has_flag) names.push_back(col.name + "__missing");
  return names;
}

Eigen::Index PreprocessPlan::feature_count() const {
  Eigen::Index n = 0;
  for (const auto& col : columns) {
    n += col.categorical ? static_cast<Eigen::Index>(col.vocab.size()) + 1 : 1;
    if (col.has_flag) ++n;
  }
  return n;
}

nlohmann::json PreprocessPlan::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json j{{"name", col.name},
                     {"categorical", col.categorical},
                     {"has_flag", col.has_flag}};
    if (col.categorical) {
      j["vocab"] = col.vocab;
    } else {
      j["mean"] = col.mean;
      j["stddev"] = col.stddev;
    }
    cols.push_back(std::move(j));
  }
  return nlohmann::json{{"version", 1}, {"train_rows", train_rows}, {"columns", std::move(cols)}};
}

PreprocessPlan PreprocessPlan::from_json(const nlohmann::json& j) {
  PreprocessPlan plan;
  plan.train_rows = j.at("train_rows").get<std::size_t>();
  for (const auto& jc : j.at("columns")) {
    Column col;
    col.name = jc.at("name").get<std::string>();
    col.categorical = jc.at("categorical").get<bool>();
    col.has_flag = jc.at("has_flag").get<bool>();
    if (col.categorical) {
      col.vocab = jc.at("vocab").get<std::vector<std::string>>();
    } else {
      col.mean = jc.at("mean").get<double>();
      col.stddev = jc.at("stddev").get<double>();
    }
    plan.columns.push_back(std::move(col));
  }
  return plan;
}

PreprocessPlan fit_preprocess(const RawTable& table, const ColumnSchema& schema,
                              std::span<const std::size_t> train_rows) {
  if (train_rows.empty()) throw Error("empty-train", "cannot fit a plan on zero rows");
  PreprocessPlan plan;
  plan.train_rows = train_rows.size();

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const std::string& name = table.columns[c];
    const auto role = schema.role_of(name);
    const bool numeric = role && (*role == ColumnRole::FeatureNumeric || *role == ColumnRole::FeatureDate);
    const bool categorical = role && *role == ColumnRole::FeatureCategorical;
    if (!numeric && !categorical) continue;

    PreprocessPlan::Column col;
    col.name = name;
    col.categorical = categorical;

    if (numeric) {
      // Two-pass mean/variance over observed cells; population stddev.
      double sum = 0.0;
      std::size_t observed = 0;
      for (std::size_t r : train_rows) {
        const std::string& cell = table.rows[r][c];
        if (cell.empty()) {
          col.has_flag = true;
          continue;
        }
        double v;
        if (!parse_double(cell, v))
          throw Error("unparseable-number", name + " row " + std::to_string(r) + ": '" + cell + "'");
        sum += v;
        ++observed;
      }
      if (observed > 0) {
        col.mean = sum / static_cast<double>(observed);
        double ss = 0.0;
        for (std::size_t r : train_rows) {
          const std::string& cell = table.rows[r][c];
          if (cell.empty()) continue;
          double v;
          parse_double(cell, v);
          ss += (v - col.mean) * (v - col.mean);
        }
        col.stddev = std::sqrt(ss / static_cast<double>(observed));
      }
    } else {
      std::map<std::string, std::size_t> counts;
      for (std::size_t r : train_rows) {
        const std::string& cell = table.rows[r][c];
        if (cell.empty()) {
          col.has_flag = true;
          continue;
        }
        ++counts[cell];
      }
      const double denom = static_cast<double>(train_rows.size());
      for (const auto& [cat, count] : counts) {
        if (static_cast<double>(count) / denom >= kRareCategoryThreshold) col.vocab.push_back(cat);
      }
      // std::map iteration is already sorted; keep the vocabulary lexicographic.
    }
    plan.columns.push_back(std::move(col));
  }
  return plan;
}

PreprocessPlan fit_preprocess(const RawTable& table, const ColumnSchema& schema) {
  const auto rows = all_rows(table);
  return fit_preprocess(table, schema, rows);
}

std::vector<int> extract_vintage(const RawTable& table, const ColumnSchema& schema) {
  const std::size_t vc = table.column_index(schema.vintage_column());
  std::vector<int> out(table.row_count(), 0);
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const std::string& cell = table.rows[r][vc];
    long v = 0;
    if (parse_int(cell, v)) {
      out[r] = static_cast<int>(v);
      continue;
    }
    const auto ym = parse_year_month(cell);
    if (!ym || !schema.vintage_origin)
      throw Error("unparseable-vintage",
                  "row " + std::to_string(r) + ": '" + cell + "' (declare vintage_origin for dates)");
    const auto origin = parse_year_month(*schema.vintage_origin);
    if (!origin) throw Error("invalid-schema", "bad vintage_origin '" + *schema.vintage_origin + "'");
    out[r] = (ym->first - origin->first) * 12 + (ym->second - origin->second);
  }
  return out;
}

Eigen::VectorXd extract_labels(const RawTable& table, const ColumnSchema& schema) {
  const std::size_t lc = table.column_index(schema.label_column());
  Eigen::VectorXd y(static_cast<Eigen::Index>(table.row_count()));
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    const std::string& cell = table.rows[r][lc];
    if (cell == "0" || cell == "0.0") {
      y(static_cast<Eigen::Index>(r)) = 0.0;
    } else if (cell == "1" || cell == "1.0") {
      y(static_cast<Eigen::Index>(r)) = 1.0;
    } else {
      throw Error("bad-label", "row " + std::to_string(r) + ": '" + cell + "' is not 0/1");
    }
  }
  return y;
}

Dataset apply_preprocess(const RawTable& table, const ColumnSchema& schema,
                         const PreprocessPlan& plan, std::span<const std::size_t> rows) {
  const Eigen::Index n_rows = static_cast<Eigen::Index>(rows.size());
  Dataset out;
  out.feature_names = plan.feature_names();
  out.X = Eigen::MatrixXd::Zero(n_rows, plan.feature_count());

  // Column offsets: feature blocks first, then the flag block.
  std::vector<Eigen::Index> block_offset(plan.columns.size());
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < plan.columns.size(); ++k) {
    block_offset[k] = offset;
    offset += plan.columns[k].categorical
                  ? static_cast<Eigen::Index>(plan.columns[k].vocab.size()) + 1
                  : 1;
  }
  std::vector<Eigen::Index> flag_offset(plan.columns.size(), -1);
  for (std::size_t k = 0; k < plan.columns.size(); ++k) {
    if (plan.columns[k].has_flag) flag_offset[k] = offset++;
  }

  std::vector<std::size_t> src_col(plan.columns.size());
  for (std::size_t k = 0; k < plan.columns.size(); ++k)
    src_col[k] = table.column_index(plan.columns[k].name);

  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < plan.columns.size(); ++k) {
      const auto& col = plan.columns[k];
      const std::string& cell = table.rows[r][src_col[k]];
      if (cell.empty()) {
        // Feature block stays zero; flag fires when the plan carries one.
        if (flag_offset[k] >= 0) out.X(i, flag_offset[k]) = 1.0;
        continue;
      }
      if (!col.categorical) {
        double v;
        if (!parse_double(cell, v))
          throw Error("unparseable-number", col.name + " row " + std::to_string(r) + ": '" + cell + "'");
        out.X(i, block_offset[k]) = col.stddev > 0.0 ? (v - col.mean) / col.stddev : 0.0;
      } else {
        const auto it = std::lower_bound(col.vocab.begin(), col.vocab.end(), cell);
        if (it != col.vocab.end() && *it == cell) {
          out.X(i, block_offset[k] + (it - col.vocab.begin())) = 1.0;
        } else {
          out.X(i, block_offset[k] + static_cast<Eigen::Index>(col.vocab.size())) = 1.0;
        }
      }
    }
  }

  const Eigen::VectorXd labels = extract_labels(table, schema);
  const std::vector<int> vintage = extract_vintage(table, schema);
  out.y.resize(n_rows);
  out.vintage.resize(n_rows);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    out.y(i) = labels(static_cast<Eigen::Index>(r));
    out.vintage(i) = vintage[r];
  }
  return out;
}

Dataset apply_preprocess(const RawTable& table, const ColumnSchema& schema,
                         const PreprocessPlan& plan) {
  const auto rows = all_rows(table);
  return apply_preprocess(table, schema, plan, rows);
}

}  // namespace ccr
