#pragma once

#include <vector>

#include "gridclust/opt/program.hpp"

namespace gridclust::opt {

/// LP produced from an AbsProgram by splitting weighted variables into
/// nonnegative parts. Unweighted variables keep a single column.
struct SplitProgram {
  ConvexProgram lp;
  std::vector<int> pos_col;
  std::vector<int> neg_col;  // -1 when the variable was not split

  Vector recombine(const Vector& split) const;
};

SplitProgram split_abs_program(const AbsProgram& program);

}  // namespace gridclust::opt
