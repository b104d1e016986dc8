#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace gridclust {

/// Dense node id, 1..V.
using NodeId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Selects the OpenMP kernel or its serial reference. Both must produce
/// bit-identical results.
enum class Exec { kSerial, kParallel };

/// Scenario file or input data rejected by validation.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An optimization sub-problem could not be solved.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridclust
