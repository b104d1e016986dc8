#pragma once

#include <filesystem>
#include <string>

#include "gridclust/simulation.hpp"

namespace gridclust {

/// Whether the aggregate reserves covered the aggregate requests at step
/// index i of the log and at the step before it (whose commitments act at
/// step i).
bool reserves_covered(const ControlLog& log, std::size_t i);

/// Writes into out_dir (created if needed):
///   partition_<eta>.csv            node,cluster
///   cluster_output_deviation.csv   k,time,cluster,y
///   network_total_deviation.csv    k,time,total,covered
///   requests_and_commitments.csv   k,time,cluster,r_star,r_tilde,reserve_dn,reserve_up,dy_commit,dy_applied
///   unit_dispatch.csv              k,cluster,node,kind,value
///   control_log.csv                one row per step and cluster
///   activations.csv                one row per supervisor activation
///   dcadmm_<k>.csv                 iteration traces, when kept
///   summary.txt                    key=value lines
/// Everything except the wall-clock lines of summary.txt is a deterministic
/// function of the log.
void write_report(const ControlLog& log, const Scenario& scenario, const SimulationConfig& config,
                  const std::filesystem::path& out_dir);

std::string summary_text(const ControlLog& log, const Scenario& scenario, const SimulationConfig& config);

/// Re-derives the summary from control_log.csv and activations.csv in a
/// report directory and checks the logged identities (y against the unit
/// rows, commitments against clipped requests). Throws ScenarioError when a
/// file is missing or malformed.
std::string summarize_report_dir(const std::filesystem::path& dir);

}  // namespace gridclust
