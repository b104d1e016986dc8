#pragma once

#include <filesystem>
#include <string>

#include "gridclust/network.hpp"

namespace gridclust {

/// Flat-profile scenario built from a MATPOWER case file (`mpc.bus`,
/// `mpc.gen`, `mpc.branch` matrices, as in the public case118.m).
///
///   nodes     bus numbers
///   lines     in-service branches, length |X| (parallel circuits keep the
///             smallest); zero reactance becomes `min_length`
///   sources   buses with an in-service generator; nominal = sum PG, band
///             +-source_band * nominal clipped to [sum PMIN, sum PMAX]
///   sinks     buses with PD > 0; nominal = PD, band +-load_band * PD,
///             actual = nominal (redraw with `grid simulate --seed`)
///   storages  none
///
/// Buses that are both get a dual_role entry.
struct MatpowerOptions {
  Timeline timeline{5.0, 288, 72, 4, 15};
  double source_band = 0.2;
  double load_band = 0.1;
  double min_length = 1e-4;
};

Scenario import_matpower(const std::string& case_text, const MatpowerOptions& options = {});
Scenario import_matpower_file(const std::filesystem::path& path, const MatpowerOptions& options = {});

}  // namespace gridclust
