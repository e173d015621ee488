#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccr/schema.hpp"
#include "ccr/table.hpp"

namespace ccr {

// Seeded generator of time-indexed binary-outcome tabular data with
// controllable covariate shift (feature means move) and concept drift (the
// coefficient vector moves). Labels are Bernoulli(sigmoid(intercept +
// beta_t . x + category effects + noise)).
struct DriftSpec {
  int numeric_features = 10;
  int rows_per_month = 10000;
  int months = 24;
  std::vector<double> base_coef;     // empty: the built-in alternating pattern
  double coef_drift_rate = 0.055;    // per-month coefficient movement
  double mean_shift_rate = 0.02;     // per-month feature mean movement
  int categorical_features = 2;
  double category_churn_rate = 0.125;  // one brand-new category every round(1/rate) months
  double base_intercept = -1.4;
  double noise_scale = 1.0;
  std::uint64_t seed = 1;
  bool step_drift = false;  // apply the full drift as one step at mid-horizon

  void validate() const;  // Error: invalid-spec
};

struct Generated {
  RawTable table;     // columns: num00.., cat0.., label, month
  ColumnSchema schema;
};

Generated generate(const DriftSpec& spec);

// The data-generating process, exposed so tests can build the Bayes-optimal
// scorer for a given month.
std::vector<double> monthly_coefficients(const DriftSpec& spec, int month);
double monthly_feature_mean(const DriftSpec& spec, int month, int feature);
double category_coefficient(const DriftSpec& spec, int feature, const std::string& category);
std::vector<std::pair<std::string, double>> category_mixture(const DriftSpec& spec, int month,
                                                             int feature);

}  // namespace ccr
