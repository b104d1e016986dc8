#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gridclust/common.hpp"

namespace gridclust::opt {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Convex program with a diagonal Hessian:
///
///   minimize    0.5 x'diag(q)x + c'x + offset
///   subject to  a_eq x  = b_eq
///               a_in x <= b_in
///               lo <= x <= hi        (entries may be +-infinity)
///
/// q = 0 gives an LP. All consumers in this project only need a diagonal
/// Hessian, which keeps the Newton system a sparse normal-equations solve.
struct ConvexProgram {
  Vector q;
  Vector c;
  double offset = 0.0;
  SparseMatrix a_eq;
  Vector b_eq;
  SparseMatrix a_in;
  Vector b_in;
  Vector lo;
  Vector hi;

  /// Zero objective, no rows, free variables.
  static ConvexProgram free_variables(int n);

  int num_vars() const { return static_cast<int>(c.size()); }
  double objective(const Vector& x) const;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

const char* to_string(Status status);

struct Tolerances {
  double feas = 1e-8;  // absolute
  // relative, see Solution::kkt_residual
  double kkt = 1e-6;
  int max_iter = 200;
};

struct Solution {
  Status status = Status::kInfeasible;
  Vector x;
  double objective_value = 0.0;
  /// Max over stationarity, primal feasibility, dual sign and complementarity.
  /// The dual parts are divided by 1 + the largest term of the stationarity
  /// condition; primal feasibility is absolute.
  double kkt_residual = 0.0;
  double primal_residual = 0.0;
  int iterations = 0;
  /// True when the interior iterate was replaced by the solution of the
  /// reduced KKT system on its active set (exact bound values).
  bool polished = false;
  /// Multipliers of the equality and inequality rows (empty unless optimal).
  Vector eq_multipliers;
  Vector in_multipliers;
  /// For kInfeasible: optimal value of the feasibility-restoration program
  /// (total constraint violation that could not be removed).
  double infeasibility = 0.0;
};

/// Primal-dual interior point method (Mehrotra predictor-corrector).
/// Deterministic for identical input. Throws std::invalid_argument on
/// dimension mismatches, negative Hessian entries or lo > hi; throws
/// SolverError when neither optimality nor an infeasibility/unboundedness
/// certificate could be established.
Solution solve(const ConvexProgram& program, const Tolerances& tol = {});

/// Program whose objective additionally carries sum_i abs_weight[i]*|x_i|.
/// The base program must be linear (q = 0).
struct AbsProgram {
  ConvexProgram base;
  Vector abs_weight;
};

/// Splits every weighted variable into x+ - x- with x+, x- >= 0, solves the
/// resulting LP and recombines.
Solution solve_lp_abs(const AbsProgram& program, const Tolerances& tol = {});

/// Row-by-row builder for sparse constraint matrices.
class RowBuilder {
 public:
  explicit RowBuilder(int num_cols) : num_cols_(num_cols) {}

  /// Starts a new row and returns its index.
  int add_row(double rhs);
  void add(int col, double value);

  SparseMatrix matrix() const;
  Vector rhs() const;
  int num_rows() const { return static_cast<int>(rhs_.size()); }

 private:
  int num_cols_;
  std::vector<Eigen::Triplet<double>> entries_;
  std::vector<double> rhs_;
};

}  // namespace gridclust::opt
