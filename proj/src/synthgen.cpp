#include "ccr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ccr/error.hpp"
#include "ccr/learners/logistic.hpp"
#include "ccr/rng.hpp"

namespace ccr {

void DriftSpec::validate() const {
  if (numeric_features < 1) throw Error("invalid-spec", "numeric_features must be >= 1");
  if (rows_per_month < 50) throw Error("invalid-spec", "rows_per_month must be >= 50");
  if (months < 2) throw Error("invalid-spec", "months must be >= 2");
  if (!base_coef.empty() && static_cast<int>(base_coef.size()) != numeric_features)
    throw Error("invalid-spec", "base_coef size must match numeric_features");
  if (!std::isfinite(coef_drift_rate) || !std::isfinite(mean_shift_rate))
    throw Error("invalid-spec", "drift rates must be finite");
  if (categorical_features < 0) throw Error("invalid-spec", "categorical_features must be >= 0");
  if (category_churn_rate < 0.0 || category_churn_rate > 1.0)
    throw Error("invalid-spec", "category_churn_rate must lie in [0,1]");
  if (noise_scale < 0.0) throw Error("invalid-spec", "noise_scale must be >= 0");
}

namespace {

double sign_of(int j) { return j % 2 == 0 ? 1.0 : -1.0; }

std::vector<double> base_coefficients(const DriftSpec& spec) {
  if (!spec.base_coef.empty()) return spec.base_coef;
  std::vector<double> beta(static_cast<std::size_t>(spec.numeric_features));
  const double n = static_cast<double>(spec.numeric_features);
  for (int j = 0; j < spec.numeric_features; ++j)
    beta[static_cast<std::size_t>(j)] = sign_of(j) * (0.8 - 0.5 * static_cast<double>(j) / n);
  return beta;
}

// Drift magnitude wound up to month t; the step variant applies the whole
// horizon's worth at mid-horizon for stress tests.
double drift_extent(const DriftSpec& spec, int month) {
  if (!spec.step_drift) return spec.coef_drift_rate * static_cast<double>(month);
  return month >= spec.months / 2 ? spec.coef_drift_rate * static_cast<double>(spec.months) : 0.0;
}

int churn_interval(const DriftSpec& spec) {
  if (spec.category_churn_rate <= 0.0) return 0;  // no churn
  return std::max(1, static_cast<int>(std::llround(1.0 / spec.category_churn_rate)));
}

std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::vector<double> monthly_coefficients(const DriftSpec& spec, int month) {
  auto beta = base_coefficients(spec);
  const double extent = drift_extent(spec, month);
  const double n = static_cast<double>(spec.numeric_features);
  for (int j = 0; j < spec.numeric_features; ++j) {
    // Each coefficient is pushed toward (and past) zero at its own speed, so
    // the feature ranking reorders as the horizon advances.
    const double direction = -sign_of(j) * (0.3 + 0.7 * static_cast<double>(j + 1) / n);
    beta[static_cast<std::size_t>(j)] += extent * direction;
  }
  return beta;
}

double monthly_feature_mean(const DriftSpec& spec, int month, int feature) {
  const double n = static_cast<double>(spec.numeric_features);
  return spec.mean_shift_rate * static_cast<double>(month) * sign_of(feature) *
         (static_cast<double>(feature + 1) / n);
}

double category_coefficient(const DriftSpec& spec, int feature, const std::string& category) {
  Rng rng(sub_seed(spec.seed, "cat-coef", static_cast<std::uint64_t>(feature), category));
  return 0.4 * rng.normal();
}

std::vector<std::pair<std::string, double>> category_mixture(const DriftSpec& spec, int month,
                                                             int feature) {
  (void)feature;
  std::vector<std::pair<std::string, double>> mix = {{"c0", 0.5}, {"c1", 0.3}, {"c2", 0.2}};
  const int interval = churn_interval(spec);
  if (interval > 0) {
    for (int born = interval; born <= month; born += interval)
      mix.emplace_back("m" + std::to_string(born), 0.12);
  }
  double total = 0.0;
  for (const auto& [name, w] : mix) total += w;
  for (auto& [name, w] : mix) w /= total;
  return mix;
}

Generated generate(const DriftSpec& spec) {
  spec.validate();

  Generated out;
  for (int j = 0; j < spec.numeric_features; ++j) {
    char name[16];
    std::snprintf(name, sizeof(name), "num%02d", j);
    out.table.columns.emplace_back(name);
    out.schema.columns.push_back({name, ColumnRole::FeatureNumeric});
  }
  for (int f = 0; f < spec.categorical_features; ++f) {
    const std::string name = "cat" + std::to_string(f);
    out.table.columns.push_back(name);
    out.schema.columns.push_back({name, ColumnRole::FeatureCategorical});
  }
  out.table.columns.emplace_back("label");
  out.schema.columns.push_back({"label", ColumnRole::Label});
  out.table.columns.emplace_back("month");
  out.schema.columns.push_back({"month", ColumnRole::VintageDate});

  out.table.rows.reserve(static_cast<std::size_t>(spec.months) *
                         static_cast<std::size_t>(spec.rows_per_month));

  for (int t = 0; t < spec.months; ++t) {
    Rng rng(sub_seed(spec.seed, "synthgen-month", static_cast<std::uint64_t>(t)));
    const auto beta = monthly_coefficients(spec, t);

    std::vector<std::vector<std::pair<std::string, double>>> mixtures;
    std::vector<std::vector<double>> cat_coefs;
    for (int f = 0; f < spec.categorical_features; ++f) {
      mixtures.push_back(category_mixture(spec, t, f));
      std::vector<double> coefs;
      for (const auto& [cat, w] : mixtures.back())
        coefs.push_back(category_coefficient(spec, f, cat));
      cat_coefs.push_back(std::move(coefs));
    }

    for (int r = 0; r < spec.rows_per_month; ++r) {
      std::vector<std::string> row;
      row.reserve(out.table.columns.size());
      double z = spec.base_intercept;

      for (int j = 0; j < spec.numeric_features; ++j) {
        const double x = monthly_feature_mean(spec, t, j) + rng.normal();
        z += beta[static_cast<std::size_t>(j)] * x;
        row.push_back(format_cell(x));
      }
      for (int f = 0; f < spec.categorical_features; ++f) {
        const auto& mix = mixtures[static_cast<std::size_t>(f)];
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = mix.size() - 1;
        for (std::size_t c = 0; c < mix.size(); ++c) {
          acc += mix[c].second;
          if (u < acc) {
            pick = c;
            break;
          }
        }
        z += cat_coefs[static_cast<std::size_t>(f)][pick];
        row.push_back(mix[pick].first);
      }
      z += spec.noise_scale * rng.normal();
      row.push_back(rng.bernoulli(sigmoid(z)) ? "1" : "0");
      row.push_back(std::to_string(t));
      out.table.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace ccr
