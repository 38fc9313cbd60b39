#pragma once

#include <utility>
#include <vector>

#include "psmlab/datagen.hpp"
#include "psmlab/propensity.hpp"

namespace psmlab {

// Caliper on the logit propensity scale: width = multiplier * sample SD of
// the logit PS over the full pre-match sample.
struct Caliper {
  double multiplier = 0.0;
  double width = 0.0;
};

Caliper make_caliper(double multiplier, const Vector& logit_ps);

struct MatchedPair {
  int treated = -1;
  int control = -1;
};

// 1:1 matched sample without replacement. Invariants: no index appears twice
// across all pairs, and |logit_ps[t] - logit_ps[c]| <= caliper.width for
// every pair. `source` is a non-owning pointer into the dataset the pairs
// index; it must outlive the sample.
struct MatchedSample {
  std::vector<MatchedPair> pairs;
  Caliper caliper;
  const Dataset* source = nullptr;

  int n_pairs() const { return static_cast<int>(pairs.size()); }

  // Row-stacked views of the matched units in pair order: treated of pair 0,
  // control of pair 0, treated of pair 1, ...
  Matrix covariates() const;
  IntVector treatment() const;
  Vector outcomes() const;
};

// Greedy nearest-neighbor 1:1 matching without replacement on the logit PS.
// Treated units are processed in dataset order; each takes the unmatched
// control minimizing the |logit-PS difference|, skipping when that minimum
// exceeds caliper.width. Ties between equally distant controls break toward
// the lower control index. Throws NoPairsFormed when nothing matches.
MatchedSample nearest_neighbor_match(const Dataset& ds, const PropensityFit& fit,
                                     const Caliper& caliper);

// Pair counts along a descending caliper schedule; counts are non-increasing
// as the multiplier decreases. NoPairsFormed is mapped to a count of 0.
std::vector<std::pair<double, int>> pair_count_curve(
    const Dataset& ds, const PropensityFit& fit,
    const std::vector<double>& multipliers);

}  // namespace psmlab
