#include "psmlab/matching.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace psmlab {

Caliper make_caliper(double multiplier, const Vector& logit_ps) {
  if (!(multiplier >= 0.0)) {
    throw Error("make_caliper: multiplier must be nonnegative");
  }
  return Caliper{multiplier, multiplier * sample_sd(logit_ps)};
}

Matrix MatchedSample::covariates() const {
  Matrix out(2 * n_pairs(), source->p());
  for (int k = 0; k < n_pairs(); ++k) {
    out.row(2 * k) = source->x.row(pairs[k].treated);
    out.row(2 * k + 1) = source->x.row(pairs[k].control);
  }
  return out;
}

IntVector MatchedSample::treatment() const {
  IntVector out(2 * n_pairs());
  for (int k = 0; k < n_pairs(); ++k) {
    out(2 * k) = 1;
    out(2 * k + 1) = 0;
  }
  return out;
}

Vector MatchedSample::outcomes() const {
  Vector out(2 * n_pairs());
  for (int k = 0; k < n_pairs(); ++k) {
    out(2 * k) = source->y(pairs[k].treated);
    out(2 * k + 1) = source->y(pairs[k].control);
  }
  return out;
}

MatchedSample nearest_neighbor_match(const Dataset& ds, const PropensityFit& fit,
                                     const Caliper& caliper) {
  const int n = ds.n();
  if (fit.logit_ps.size() != n) {
    throw Error("nearest_neighbor_match: fit not aligned with dataset");
  }
  const int treated_count = ds.treated_count();
  if (treated_count == 0 || treated_count == n) {
    throw OneClassOnly("nearest_neighbor_match: both classes required");
  }

  // Unmatched controls ordered by (logit PS, index); entries with equal PS
  // sit adjacent in index order, which makes the lower-index tie rule a
  // lower_bound lookup.
  std::set<std::pair<double, int>> available;
  for (int i = 0; i < n; ++i) {
    if (ds.a(i) == 0) available.emplace(fit.logit_ps(i), i);
  }

  constexpr int kLowestIndex = std::numeric_limits<int>::min();
  MatchedSample sample;
  sample.caliper = caliper;
  sample.source = &ds;

  for (int t = 0; t < n && !available.empty(); ++t) {
    if (ds.a(t) != 1) continue;
    const double target = fit.logit_ps(t);

    // `up` is the first control at or above target; because entries sort by
    // (ps, index), it is also the lowest-index control at its PS value.
    const auto up = available.lower_bound({target, kLowestIndex});
    double d_up = std::numeric_limits<double>::infinity();
    double d_down = std::numeric_limits<double>::infinity();
    double ps_down = 0.0;
    if (up != available.end()) d_up = up->first - target;
    if (up != available.begin()) {
      ps_down = std::prev(up)->first;
      d_down = target - ps_down;
    }

    const double best = std::min(d_up, d_down);
    if (!(best <= caliper.width)) continue;

    // Among all controls at the winning distance, take the lowest index;
    // candidates can sit below target, above it, or both on an exact tie.
    int chosen = std::numeric_limits<int>::max();
    if (d_down <= d_up) {
      chosen = available.lower_bound({ps_down, kLowestIndex})->second;
    }
    if (d_up <= d_down) {
      chosen = std::min(chosen, up->second);
    }

    available.erase({fit.logit_ps(chosen), chosen});
    sample.pairs.push_back({t, chosen});
  }

  if (sample.pairs.empty()) {
    throw NoPairsFormed("nearest_neighbor_match: no pair within caliper width " +
                        std::to_string(caliper.width));
  }
  return sample;
}

std::vector<std::pair<double, int>> pair_count_curve(
    const Dataset& ds, const PropensityFit& fit,
    const std::vector<double>& multipliers) {
  for (std::size_t i = 1; i < multipliers.size(); ++i) {
    if (!(multipliers[i] < multipliers[i - 1])) {
      throw Error("pair_count_curve: multipliers must be strictly descending");
    }
  }
  std::vector<std::pair<double, int>> curve;
  curve.reserve(multipliers.size());
  for (const double m : multipliers) {
    int count = 0;
    try {
      count = nearest_neighbor_match(ds, fit, make_caliper(m, fit.logit_ps)).n_pairs();
    } catch (const NoPairsFormed&) {
      count = 0;
    }
    curve.emplace_back(m, count);
  }
  return curve;
}

}  // namespace psmlab
