#pragma once

#include "ccr/learners/common.hpp"

namespace ccr {

struct GbtDiagnostics {
  // Regularized training objective after each round: sum logistic loss plus
  // accumulated gamma*T + 1/2 lambda * sum of applied (shrunk) leaf weights^2.
  std::vector<double> objective;
  int dropped_rounds = 0;  // rounds whose root found no positive-gain split
};

// Second-order gradient boosting on logistic loss. Base score is the train
// log-odds; each round fits one regression tree on (g, h) = (p - y, p(1-p)).
// Rounds that cannot split the root contribute nothing.
// Error: single-class-labels.
ModelArtifact train_gbt(const Dataset& train, const GbtConfig& config,
                        GbtDiagnostics* diagnostics = nullptr);

}  // namespace ccr
