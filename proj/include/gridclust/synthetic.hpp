#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gridclust/network.hpp"

namespace gridclust {

struct SyntheticDayOptions {
  std::uint64_t seed = 2020;
  /// Caps the sources of region A (nodes 1..30) in the last clustering
  /// period and ramps its demand slowly past that cap.
  bool deficit_in_last_period = true;
};

/// 118-node, four-region network with a source and battery at 54 nodes and
/// sinks at the other 64; tau = 5 min, N_t = 288, N_c = 72, M = 4, N_p = 15.
/// Regions are nodes 1-30, 31-59, 60-89 and 90-118, joined by two long tie
/// lines per adjacent pair.
Scenario make_synthetic_day(const SyntheticDayOptions& options = {});

/// Portable uniform draw in [0, 1) from the raw engine output.
double uniform01(std::mt19937_64& rng);

/// Random walk that starts at `start` and stays inside [lo[k], hi[k]]; each
/// step moves by a uniform draw of at most `step_fraction` of the local band.
std::vector<double> bounded_random_walk(const std::vector<double>& lo, const std::vector<double>& hi, double start,
                                        double step_fraction, std::mt19937_64& rng);

/// Replaces every sink's D_actual by a bounded random walk around D_nom.
void regenerate_actuals(Scenario& scenario, std::uint64_t seed, double step_fraction = 0.05);

}  // namespace gridclust
