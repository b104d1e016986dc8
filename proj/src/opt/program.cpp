#include "gridclust/opt/program.hpp"

#include <stdexcept>

namespace gridclust::opt {

ConvexProgram ConvexProgram::free_variables(int n) {
  ConvexProgram p;
  p.q = Vector::Zero(n);
  p.c = Vector::Zero(n);
  p.a_eq.resize(0, n);
  p.b_eq.resize(0);
  p.a_in.resize(0, n);
  p.b_in.resize(0);
  p.lo = Vector::Constant(n, -kInf);
  p.hi = Vector::Constant(n, kInf);
  return p;
}

double ConvexProgram::objective(const Vector& x) const {
  return 0.5 * x.dot(q.cwiseProduct(x)) + c.dot(x) + offset;
}

const char* to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
  }
  return "unknown";
}

int RowBuilder::add_row(double rhs) {
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void RowBuilder::add(int col, double value) {
  if (rhs_.empty()) throw std::logic_error("RowBuilder::add before add_row");
  if (col < 0 || col >= num_cols_) throw std::out_of_range("RowBuilder column");
  entries_.emplace_back(num_rows() - 1, col, value);
}

SparseMatrix RowBuilder::matrix() const {
  SparseMatrix m(num_rows(), num_cols_);
  m.setFromTriplets(entries_.begin(), entries_.end());
  return m;
}

Vector RowBuilder::rhs() const {
  return Eigen::Map<const Vector>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
}

}  // namespace gridclust::opt
