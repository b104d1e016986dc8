#pragma once

#include <filesystem>
#include <string>

#include "gridclust/network.hpp"

namespace gridclust {

/// Reads a scenario JSON document. External node ids are renumbered densely
/// in ascending order; the mapping is kept in Scenario::external_id.
/// Profile arrays may be inline or refer to a CSV file (`node,k,value`)
/// resolved relative to the document's directory. The result is validated.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});

/// Inline-array serialization using external ids. Doubles are written with
/// round-trip precision.
std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

}  // namespace gridclust
