#pragma once

#include "ccr/learners/common.hpp"

namespace ccr {

// Bagged Gini forest; the final score is the mean of per-tree leaf class
// frequencies. Bootstrap resamples and per-split feature subsets are drawn
// from per-tree streams derived from config.seed, so tree construction can
// run in any order (or in parallel) with identical results.
// Error: single-class-labels.
ModelArtifact train_rf(const Dataset& train, const RfConfig& config, int threads = 1);

}  // namespace ccr
