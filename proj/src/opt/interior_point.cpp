#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include "gridclust/opt/program.hpp"
#include "gridclust/opt/split.hpp"

namespace gridclust::opt {
namespace {

constexpr double kStepFraction = 0.995;
constexpr double kDivergence = 1e14;
constexpr double kMinCurvature = 1e-7;
constexpr int kMaxLuDim = 1500;

void validate(const ConvexProgram& p) {
  const auto n = p.c.size();
  auto fail = [](const std::string& what) { throw std::invalid_argument("convex program: " + what); };
  if (p.q.size() != n) fail("Hessian diagonal has wrong length");
  if (p.lo.size() != n || p.hi.size() != n) fail("bound vectors have wrong length");
  if (p.a_eq.cols() != n || p.a_eq.rows() != p.b_eq.size()) fail("equality system dimension mismatch");
  if (p.a_in.cols() != n || p.a_in.rows() != p.b_in.size()) fail("inequality system dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p.q[i] >= 0.0) || !std::isfinite(p.q[i])) {
      std::ostringstream os;
      os << "Hessian entry " << i << " = " << p.q[i] << " is not positive semidefinite";
      fail(os.str());
    }
    if (!std::isfinite(p.c[i])) fail("non-finite linear coefficient");
    if (std::isnan(p.lo[i]) || std::isnan(p.hi[i]) || p.lo[i] > p.hi[i]) {
      std::ostringstream os;
      os << "bounds of variable " << i << " are inverted (" << p.lo[i] << " > " << p.hi[i] << ")";
      fail(os.str());
    }
  }
  if (!p.b_eq.allFinite() || !p.b_in.allFinite()) fail("non-finite right-hand side");
}

double max_step(const Vector& s, const Vector& ds) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (ds[i] < 0.0) alpha = std::min(alpha, -s[i] / ds[i]);
  }
  return alpha;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
  return out;
}

struct Iterate {
  Vector x, tl, tu, w;  // primal and slacks
  Vector y, v, zl, zu;  // multipliers
};

struct Direction {
  Vector dx, dtl, dtu, dw, dy, dv, dzl, dzu;
};

struct Residuals {
  Vector rd, re, ri, rl, ru;
  double primal = 0.0;
  double dual = 0.0;
  double comp = 0.0;
  double mu = 0.0;
};

// Newton system for the interior point method. Slacks and bound multipliers
// are eliminated, leaving the normal equations
//   (A D^-1 A' + diag(0, W/V)) [dy; dv] = rhs
// over the stacked constraint matrix A = [a_eq; a_in].
class InteriorPoint {
 public:
  InteriorPoint(const ConvexProgram& p, const Tolerances& tol) : p_(p), tol_(tol) {
    n_ = p.num_vars();
    me_ = p.a_eq.rows();
    mi_ = p.a_in.rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(p.a_eq.nonZeros() + p.a_in.nonZeros()));
    for (int k = 0; k < p.a_eq.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(p.a_eq, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < p.a_in.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(p.a_in, k); it; ++it)
        trip.emplace_back(me_ + it.row(), it.col(), it.value());
    a_.resize(me_ + mi_, n_);
    a_.setFromTriplets(trip.begin(), trip.end());
    at_ = a_.transpose();
    for (int i = 0; i < n_; ++i) {
      if (std::isfinite(p.lo[i])) lower_.push_back(i);
      if (std::isfinite(p.hi[i])) upper_.push_back(i);
    }
    lo_ = gather(p.lo, lower_);
    hi_ = gather(p.hi, upper_);
    ncomp_ = static_cast<int>(lower_.size() + upper_.size()) + static_cast<int>(mi_);
    quadratic_ = (p.q.array() > 0.0).any();
  }

  bool run() {
    start();
    for (iterations_ = 0; iterations_ < tol_.max_iter; ++iterations_) {
      Residuals r = residuals();
      if (r.primal <= 0.1 * tol_.feas && r.dual <= 0.1 * tol_.kkt && r.comp <= 1e-3 * tol_.kkt) return true;
      if (diverged()) return false;
      if (!factorize()) return false;

      // Predictor.
      Vector rc_l = -it_.tl.cwiseProduct(it_.zl);
      Vector rc_u = -it_.tu.cwiseProduct(it_.zu);
      Vector rc_w = -it_.w.cwiseProduct(it_.v);
      Direction aff = direction(r, rc_l, rc_u, rc_w);

      double sigma = 0.0;
      if (ncomp_ > 0 && r.mu > 0.0) {
        auto [ap, ad] = step_lengths(aff, 1.0);
        const double mu_aff = complementarity(ap, ad, aff) / ncomp_;
        sigma = std::clamp(std::pow(mu_aff / r.mu, 3.0), 0.0, 1.0);
        // Corrector.
        rc_l.array() += sigma * r.mu - aff.dtl.cwiseProduct(aff.dzl).array();
        rc_u.array() += sigma * r.mu - aff.dtu.cwiseProduct(aff.dzu).array();
        rc_w.array() += sigma * r.mu - aff.dw.cwiseProduct(aff.dv).array();
      }
      Direction d = ncomp_ > 0 ? direction(r, rc_l, rc_u, rc_w) : aff;
      auto [ap, ad] = step_lengths(d, kStepFraction);
      advance(d, ap, ad);
    }
    return false;
  }

  const Iterate& iterate() const { return it_; }
  int iterations() const { return iterations_; }
  const std::vector<int>& lower() const { return lower_; }
  const std::vector<int>& upper() const { return upper_; }

 private:
  void start() {
    it_.x = Vector::Zero(n_);
    for (int i = 0; i < n_; ++i) {
      const double lo = p_.lo[i], hi = p_.hi[i];
      const bool fl = std::isfinite(lo), fh = std::isfinite(hi);
      if (fl && fh) it_.x[i] = 0.5 * (lo + hi);
      else if (fl) it_.x[i] = std::max(0.0, lo + 1.0);
      else if (fh) it_.x[i] = std::min(0.0, hi - 1.0);
    }
    it_.tl = (gather(it_.x, lower_) - lo_).cwiseMax(1.0);
    it_.tu = (hi_ - gather(it_.x, upper_)).cwiseMax(1.0);
    it_.w = (p_.b_in - p_.a_in * it_.x).cwiseMax(1.0);
    it_.y = Vector::Zero(me_);
    it_.v = Vector::Ones(mi_);
    it_.zl = Vector::Ones(static_cast<Eigen::Index>(lower_.size()));
    it_.zu = Vector::Ones(static_cast<Eigen::Index>(upper_.size()));
    analyzed_ = false;
  }

  Residuals residuals() const {
    Residuals r;
    Vector mult(me_ + mi_);
    mult << it_.y, it_.v;
    r.rd = p_.q.cwiseProduct(it_.x) + p_.c + at_ * mult;
    for (std::size_t k = 0; k < lower_.size(); ++k) r.rd[lower_[k]] -= it_.zl[static_cast<Eigen::Index>(k)];
    for (std::size_t k = 0; k < upper_.size(); ++k) r.rd[upper_[k]] += it_.zu[static_cast<Eigen::Index>(k)];
    const Vector ax = a_ * it_.x;
    r.re = ax.head(me_) - p_.b_eq;
    r.ri = ax.tail(mi_) + it_.w - p_.b_in;
    r.rl = gather(it_.x, lower_) - lo_ - it_.tl;
    r.ru = gather(it_.x, upper_) + it_.tu - hi_;
    auto inf = [](const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; };
    r.primal = std::max({inf(r.re), inf(r.ri), inf(r.rl), inf(r.ru)});
    // Dual quantities are measured relative to the size of the terms that
    // make up the stationarity condition.
    const double scale = 1.0 + std::max({inf(p_.q.cwiseProduct(it_.x)), inf(p_.c), inf(at_ * mult), inf(it_.zl), inf(it_.zu)});
    r.dual = inf(r.rd) / scale;
    const Vector cl = it_.tl.cwiseProduct(it_.zl), cu = it_.tu.cwiseProduct(it_.zu), cw = it_.w.cwiseProduct(it_.v);
    r.comp = std::max({inf(cl), inf(cu), inf(cw)}) / scale;
    r.mu = ncomp_ > 0 ? (cl.sum() + cu.sum() + cw.sum()) / ncomp_ : 0.0;
    return r;
  }

  bool diverged() const {
    auto big = [](const Vector& v) { return v.size() && !(v.lpNorm<Eigen::Infinity>() < kDivergence); };
    return big(it_.x) || big(it_.y) || big(it_.v) || big(it_.zl) || big(it_.zu);
  }

  bool factorize() {
    curvature_ = p_.q;
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      curvature_[lower_[k]] += it_.zl[j] / it_.tl[j];
    }
    for (std::size_t k = 0; k < upper_.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      curvature_[upper_[k]] += it_.zu[j] / it_.tu[j];
    }
    dinv_ = curvature_.cwiseMax(kMinCurvature).cwiseInverse();
    theta_ = it_.w.cwiseQuotient(it_.v);

    SparseMatrix normal = a_ * dinv_.asDiagonal() * at_;
    double max_diag = 1.0;
    for (Eigen::Index i = 0; i < normal.rows(); ++i) max_diag = std::max(max_diag, std::abs(normal.coeff(i, i)));
    for (double reg = 1e-12 * max_diag;; reg *= 100.0) {
      std::vector<Eigen::Triplet<double>> diag;
      diag.reserve(static_cast<std::size_t>(me_ + mi_));
      for (Eigen::Index i = 0; i < me_; ++i) diag.emplace_back(i, i, reg);
      for (Eigen::Index i = 0; i < mi_; ++i) diag.emplace_back(me_ + i, me_ + i, theta_[i] + reg);
      SparseMatrix d(me_ + mi_, me_ + mi_);
      d.setFromTriplets(diag.begin(), diag.end());
      SparseMatrix m = normal + d;
      if (!analyzed_) {
        ldlt_.analyzePattern(m);
        analyzed_ = true;
      }
      ldlt_.factorize(m);
      if (ldlt_.info() == Eigen::Success) return true;
      if (reg > 1e-2 * max_diag) return false;
    }
  }

  // Applies the unregularized reduced matrix.
  Vector apply_normal(const Vector& s) const {
    Vector out = a_ * dinv_.cwiseProduct(at_ * s);
    out.tail(mi_) += theta_.cwiseProduct(s.tail(mi_));
    return out;
  }

  Direction direction(const Residuals& r, const Vector& rc_l, const Vector& rc_u, const Vector& rc_w) const {
    Vector g = -r.rd;
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      g[lower_[k]] += (rc_l[j] - it_.zl[j] * r.rl[j]) / it_.tl[j];
    }
    for (std::size_t k = 0; k < upper_.size(); ++k) {
      const auto j = static_cast<Eigen::Index>(k);
      g[upper_[k]] -= (rc_u[j] + it_.zu[j] * r.ru[j]) / it_.tu[j];
    }
    Vector rhs = a_ * dinv_.cwiseProduct(g);
    rhs.head(me_) += r.re;
    rhs.tail(mi_) += rc_w.cwiseQuotient(it_.v) + r.ri;

    Vector sol = ldlt_.solve(rhs);
    for (int pass = 0; pass < 3; ++pass) {
      const Vector res = rhs - apply_normal(sol);
      sol += ldlt_.solve(res);
    }

    Direction d;
    d.dy = sol.head(me_);
    d.dv = sol.tail(mi_);
    d.dx = dinv_.cwiseProduct(g - at_ * sol);
    d.dtl = gather(d.dx, lower_) + r.rl;
    d.dzl = (rc_l - it_.zl.cwiseProduct(d.dtl)).cwiseQuotient(it_.tl);
    d.dtu = -r.ru - gather(d.dx, upper_);
    d.dzu = (rc_u - it_.zu.cwiseProduct(d.dtu)).cwiseQuotient(it_.tu);
    d.dw = -r.ri - (a_ * d.dx).tail(mi_);
    return d;
  }

  std::pair<double, double> step_lengths(const Direction& d, double fraction) const {
    double ap = std::min({max_step(it_.tl, d.dtl), max_step(it_.tu, d.dtu), max_step(it_.w, d.dw)});
    double ad = std::min({max_step(it_.zl, d.dzl), max_step(it_.zu, d.dzu), max_step(it_.v, d.dv)});
    ap = std::min(1.0, fraction * ap);
    ad = std::min(1.0, fraction * ad);
    if (quadratic_) ap = ad = std::min(ap, ad);
    return {ap, ad};
  }

  double complementarity(double ap, double ad, const Direction& d) const {
    return (it_.tl + ap * d.dtl).dot(it_.zl + ad * d.dzl) + (it_.tu + ap * d.dtu).dot(it_.zu + ad * d.dzu) +
           (it_.w + ap * d.dw).dot(it_.v + ad * d.dv);
  }

  void advance(const Direction& d, double ap, double ad) {
    it_.x += ap * d.dx;
    it_.tl += ap * d.dtl;
    it_.tu += ap * d.dtu;
    it_.w += ap * d.dw;
    it_.y += ad * d.dy;
    it_.v += ad * d.dv;
    it_.zl += ad * d.dzl;
    it_.zu += ad * d.dzu;
  }

  const ConvexProgram& p_;
  Tolerances tol_;
  Eigen::Index n_ = 0, me_ = 0, mi_ = 0;
  int ncomp_ = 0;
  bool quadratic_ = false;
  SparseMatrix a_, at_;
  std::vector<int> lower_, upper_;
  Vector lo_, hi_;
  Iterate it_;
  int iterations_ = 0;
  Vector curvature_, dinv_, theta_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  bool analyzed_ = false;
};

struct KktMeasure {
  double primal = 0.0;
  double kkt = 0.0;
};

// Primal infeasibility and the largest of stationarity, primal, dual-sign and
// complementarity violations. zl and zu are dense over all variables.
KktMeasure measure(const ConvexProgram& p, const Vector& x, const Vector& y, const Vector& v, const Vector& zl,
                   const Vector& zu) {
  const Vector qx = p.q.cwiseProduct(x), aty = p.a_eq.transpose() * y, atv = p.a_in.transpose() * v;
  const Vector stat = qx + p.c + aty + atv - zl + zu;
  auto inf = [](const Vector& u) { return u.size() ? u.lpNorm<Eigen::Infinity>() : 0.0; };
  const double scale = 1.0 + std::max({inf(qx), inf(p.c), inf(aty), inf(atv), inf(zl), inf(zu)});
  const Vector eq = p.a_eq * x - p.b_eq;
  const Vector slack = p.b_in - p.a_in * x;
  double primal = eq.size() ? eq.lpNorm<Eigen::Infinity>() : 0.0;
  double dual = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < slack.size(); ++i) {
    primal = std::max(primal, -slack[i]);
    dual = std::max(dual, -v[i]);
    comp = std::max(comp, std::abs(v[i] * slack[i]));
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    primal = std::max({primal, p.lo[i] - x[i], x[i] - p.hi[i]});
    dual = std::max({dual, -zl[i], -zu[i]});
    if (std::isfinite(p.lo[i])) comp = std::max(comp, std::abs(zl[i] * (x[i] - p.lo[i])));
    if (std::isfinite(p.hi[i])) comp = std::max(comp, std::abs(zu[i] * (p.hi[i] - x[i])));
  }
  return {primal, std::max({inf(stat) / scale, primal, dual / scale, comp / scale})};
}

Solution finalize(const ConvexProgram& p, const InteriorPoint& ipm) {
  const Iterate& it = ipm.iterate();
  Solution s;
  s.x = it.x.cwiseMax(p.lo).cwiseMin(p.hi);
  s.iterations = ipm.iterations();
  s.eq_multipliers = it.y;
  s.in_multipliers = it.v;
  s.objective_value = p.objective(s.x);

  Vector zl = Vector::Zero(p.num_vars()), zu = Vector::Zero(p.num_vars());
  for (std::size_t k = 0; k < ipm.lower().size(); ++k) zl[ipm.lower()[k]] = it.zl[static_cast<Eigen::Index>(k)];
  for (std::size_t k = 0; k < ipm.upper().size(); ++k) zu[ipm.upper()[k]] = it.zu[static_cast<Eigen::Index>(k)];
  const KktMeasure m = measure(p, s.x, it.y, it.v, zl, zu);
  s.primal_residual = m.primal;
  s.kkt_residual = m.kkt;
  s.status = Status::kOptimal;
  return s;
}

enum class Fix { kFree, kLower, kUpper };

struct ActiveSet {
  std::vector<Fix> fix;          // per variable
  std::vector<int> rows;         // active inequality rows, ascending
};

// A bound or row is guessed active when its slack is below kappa times its
// multiplier.
ActiveSet guess_active_set(const ConvexProgram& p, const InteriorPoint& ipm, double kappa) {
  const Iterate& it = ipm.iterate();
  ActiveSet as;
  as.fix.assign(static_cast<std::size_t>(p.num_vars()), Fix::kFree);
  for (std::size_t k = 0; k < ipm.lower().size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    if (it.tl[j] < kappa * it.zl[j]) as.fix[static_cast<std::size_t>(ipm.lower()[k])] = Fix::kLower;
  }
  for (std::size_t k = 0; k < ipm.upper().size(); ++k) {
    const auto j = static_cast<Eigen::Index>(k);
    const int i = ipm.upper()[k];
    auto& f = as.fix[static_cast<std::size_t>(i)];
    if (it.tu[j] < kappa * it.zu[j] && (f == Fix::kFree || p.hi[i] - it.x[i] < it.x[i] - p.lo[i])) f = Fix::kUpper;
  }
  for (int i = 0; i < p.a_in.rows(); ++i)
    if (it.w[i] < kappa * it.v[i]) as.rows.push_back(i);
  return as;
}

// Fixes the active set and solves the reduced KKT system. The result
// replaces the interior iterate only if it passes the KKT test on its own
// multipliers; otherwise the last rejected point is left in `last`.
std::optional<Solution> solve_active(const ConvexProgram& p, const InteriorPoint& ipm, const Tolerances& tol,
                                     const ActiveSet& as, Vector& last) {
  const Iterate& it = ipm.iterate();
  const int n = p.num_vars();
  const int me = static_cast<int>(p.a_eq.rows()), mi = static_cast<int>(p.a_in.rows());
  const std::vector<Fix>& fix = as.fix;
  const std::vector<int>& active_rows = as.rows;
  last.resize(0);

  Vector x = Vector::Zero(n);
  std::vector<int> col(static_cast<std::size_t>(n), -1);
  int nf = 0;
  for (int i = 0; i < n; ++i) {
    const auto f = fix[static_cast<std::size_t>(i)];
    if (f == Fix::kLower) x[i] = p.lo[i];
    else if (f == Fix::kUpper) x[i] = p.hi[i];
    else col[static_cast<std::size_t>(i)] = nf++;
  }
  const int mr = me + static_cast<int>(active_rows.size());
  const int dim = nf + mr;

  // Rows of the reduced system: all equalities, then the active inequalities.
  std::vector<Eigen::Triplet<double>> rows;
  for (int k = 0; k < p.a_eq.outerSize(); ++k)
    for (SparseMatrix::InnerIterator e(p.a_eq, k); e; ++e) rows.emplace_back(e.row(), e.col(), e.value());
  std::vector<int> row_of(static_cast<std::size_t>(mi), -1);
  for (std::size_t r = 0; r < active_rows.size(); ++r) row_of[static_cast<std::size_t>(active_rows[r])] = me + static_cast<int>(r);
  for (int k = 0; k < p.a_in.outerSize(); ++k)
    for (SparseMatrix::InnerIterator e(p.a_in, k); e; ++e)
      if (row_of[static_cast<std::size_t>(e.row())] >= 0) rows.emplace_back(row_of[static_cast<std::size_t>(e.row())], e.col(), e.value());
  SparseMatrix a(mr, n);
  a.setFromTriplets(rows.begin(), rows.end());
  Vector b(mr);
  b.head(me) = p.b_eq;
  for (std::size_t r = 0; r < active_rows.size(); ++r) b[me + static_cast<Eigen::Index>(r)] = p.b_in[active_rows[r]];
  const Vector rhs_rows = b - a * x;

  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    const int c = col[static_cast<std::size_t>(i)];
    if (c >= 0) trip.emplace_back(c, c, p.q[i]);
  }
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator e(a, k); e; ++e) {
      const int c = col[static_cast<std::size_t>(e.col())];
      if (c < 0) continue;
      trip.emplace_back(nf + e.row(), c, e.value());
      trip.emplace_back(c, nf + e.row(), e.value());
    }
  }
  SparseMatrix kmat(dim, dim);
  kmat.setFromTriplets(trip.begin(), trip.end());
  Vector rhs(dim);
  for (int i = 0; i < n; ++i)
    if (col[static_cast<std::size_t>(i)] >= 0) rhs[col[static_cast<std::size_t>(i)]] = -p.c[i];
  rhs.tail(mr) = rhs_rows;

  // When the active constraints pin every free variable (a vertex), x is
  // recomputed from a square nonsingular subset of those rows alone.
  std::optional<Vector> vertex;
  if (nf == 0) vertex = Vector();
  if (nf > 0 && nf <= kMaxLuDim && mr >= nf) {
    std::vector<Eigen::Triplet<double>> tt;
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator e(a, k); e; ++e)
        if (const int c = col[static_cast<std::size_t>(e.col())]; c >= 0) tt.emplace_back(c, e.row(), e.value());
    SparseMatrix at(nf, mr);
    at.setFromTriplets(tt.begin(), tt.end());
    at.makeCompressed();
    Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr(at);
    if (qr.info() == Eigen::Success && qr.rank() == nf) {
      const auto perm = qr.colsPermutation().indices();
      std::vector<int> pick(static_cast<std::size_t>(mr), -1);
      for (int r = 0; r < nf; ++r) pick[static_cast<std::size_t>(perm[r])] = r;
      std::vector<Eigen::Triplet<double>> st;
      Vector sb(nf);
      for (int k = 0; k < at.outerSize(); ++k)
        for (SparseMatrix::InnerIterator e(at, k); e; ++e)
          if (const int r = pick[static_cast<std::size_t>(e.col())]; r >= 0) st.emplace_back(r, e.row(), e.value());
      for (int r = 0; r < mr; ++r)
        if (pick[static_cast<std::size_t>(r)] >= 0) sb[pick[static_cast<std::size_t>(r)]] = rhs_rows[r];
      SparseMatrix sq(nf, nf);
      sq.setFromTriplets(st.begin(), st.end());
      sq.makeCompressed();
      Eigen::SparseLU<SparseMatrix> lu(sq);
      if (lu.info() == Eigen::Success) {
        Vector xf = lu.solve(sb);
        if (lu.info() == Eigen::Success && xf.allFinite()) vertex = xf;
      }
    }
  }

  // A nonsingular reduced system is solved directly, which reproduces exact
  // values on simple structure; otherwise a quasi-definite regularization
  // with iterative refinement picks one solution of the singular system.
  auto try_multipliers = [&](const Vector& xc, const Vector& y, const Vector& v) -> std::optional<Solution> {

    // Reduced costs of the fixed variables become their bound multipliers.
    const Vector reduced = p.q.cwiseProduct(xc) + p.c + p.a_eq.transpose() * y + p.a_in.transpose() * v;
    Vector zl = Vector::Zero(n), zu = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      const auto f = fix[static_cast<std::size_t>(i)];
      if (f != Fix::kFree && p.lo[i] == p.hi[i]) {
        zl[i] = std::max(reduced[i], 0.0);
        zu[i] = std::max(-reduced[i], 0.0);
      } else if (f == Fix::kLower) {
        zl[i] = reduced[i];
      } else if (f == Fix::kUpper) {
        zu[i] = -reduced[i];
      }
    }
    const KktMeasure m = measure(p, xc, y, v, zl, zu);
    if (m.primal > tol.feas || m.kkt > tol.kkt) {
      last = xc;
      return std::nullopt;
    }
    Solution s;
    s.status = Status::kOptimal;
    s.x = xc.cwiseMax(p.lo).cwiseMin(p.hi);
    s.objective_value = p.objective(s.x);
    s.primal_residual = m.primal;
    s.kkt_residual = m.kkt;
    s.iterations = ipm.iterations();
    s.polished = true;
    s.eq_multipliers = y;
    s.in_multipliers = v;
    return s;
  };
  auto try_candidate = [&](const Vector& sol) -> std::optional<Solution> {
    if (!sol.allFinite()) return std::nullopt;
    Vector xc = x;
    for (int i = 0; i < n; ++i)
      if (const int c = col[static_cast<std::size_t>(i)]; c >= 0) xc[i] = vertex ? (*vertex)[c] : sol[c];
    Vector v = Vector::Zero(mi);
    for (std::size_t r = 0; r < active_rows.size(); ++r) v[active_rows[r]] = sol[nf + me + static_cast<Eigen::Index>(r)];
    return try_multipliers(xc, sol.segment(nf, me), v);
  };

  // At a degenerate vertex the reduced system leaves the multipliers
  // undetermined; the interior iterate's own multipliers are the natural pick.
  if (vertex) {
    Vector xc = x;
    for (int i = 0; i < n; ++i)
      if (const int c = col[static_cast<std::size_t>(i)]; c >= 0) xc[i] = (*vertex)[c];
    Vector v = Vector::Zero(mi);
    for (int r : active_rows) v[r] = it.v[r];
    if (auto s = try_multipliers(xc, it.y, v)) return s;
  }

  if (dim == 0) return try_candidate(Vector());
  // With every variable fixed the reduced matrix is empty; nothing to factor.
  if (nf == 0) return std::nullopt;
  // LU fill-in on large saddle-point systems can be catastrophic; those go
  // straight to the regularized factorization.
  if (dim <= kMaxLuDim) {
    Eigen::SparseLU<SparseMatrix> lu;
    kmat.makeCompressed();
    lu.compute(kmat);
    if (lu.info() == Eigen::Success) {
      Vector sol = lu.solve(rhs);
      if (lu.info() == Eigen::Success) {
        sol += lu.solve(rhs - kmat * sol);
        if (auto s = try_candidate(sol)) return s;
      }
    }
  }
  constexpr double kReg = 1e-8;
  SparseMatrix kreg = kmat;
  for (int i = 0; i < dim; ++i) kreg.coeffRef(i, i) += i < nf ? kReg : -kReg;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(kreg);
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  Vector sol = ldlt.solve(rhs);
  for (int pass = 0; pass < 10; ++pass) sol += ldlt.solve(rhs - kmat * sol);
  return try_candidate(sol);
}

// Starts from the guessed active set and, while the reduced solution
// leaves its box or violates an inactive row, adds those constraints.
std::optional<Solution> polish(const ConvexProgram& p, const InteriorPoint& ipm, const Tolerances& tol, double kappa) {
  constexpr int kRounds = 4;
  ActiveSet as = guess_active_set(p, ipm, kappa);
  Vector last;
  for (int round = 0; round < kRounds; ++round) {
    if (auto s = solve_active(p, ipm, tol, as, last)) return s;
    if (last.size() == 0) return std::nullopt;
    bool changed = false;
    for (int i = 0; i < p.num_vars(); ++i) {
      auto& f = as.fix[static_cast<std::size_t>(i)];
      if (f != Fix::kFree) continue;
      if (last[i] < p.lo[i] - tol.feas) f = Fix::kLower;
      else if (last[i] > p.hi[i] + tol.feas) f = Fix::kUpper;
      changed = changed || f != Fix::kFree;
    }
    const Vector slack = p.b_in - p.a_in * last;
    for (int i = 0; i < slack.size(); ++i) {
      if (slack[i] >= -tol.feas || std::binary_search(as.rows.begin(), as.rows.end(), i)) continue;
      as.rows.insert(std::lower_bound(as.rows.begin(), as.rows.end(), i), i);
      changed = true;
    }
    if (!changed) return std::nullopt;
  }
  return std::nullopt;
}

// Minimum total violation of the linear rows with x held in its box.
double restoration_value(const ConvexProgram& p, const Tolerances& tol) {
  const int n = p.num_vars();
  const int me = static_cast<int>(p.a_eq.rows()), mi = static_cast<int>(p.a_in.rows());
  const int nv = n + 2 * me + mi;
  ConvexProgram r = ConvexProgram::free_variables(nv);
  r.lo.head(n) = p.lo;
  r.hi.head(n) = p.hi;
  r.lo.tail(nv - n).setZero();
  r.c.tail(nv - n).setOnes();
  std::vector<Eigen::Triplet<double>> eq, in;
  for (int k = 0; k < p.a_eq.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.a_eq, k); it; ++it) eq.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < me; ++i) {
    eq.emplace_back(i, n + i, 1.0);
    eq.emplace_back(i, n + me + i, -1.0);
  }
  for (int k = 0; k < p.a_in.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.a_in, k); it; ++it) in.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < mi; ++i) in.emplace_back(i, n + 2 * me + i, -1.0);
  r.a_eq.resize(me, nv);
  r.a_eq.setFromTriplets(eq.begin(), eq.end());
  r.b_eq = p.b_eq;
  r.a_in.resize(mi, nv);
  r.a_in.setFromTriplets(in.begin(), in.end());
  r.b_in = p.b_in;
  InteriorPoint ipm(r, tol);
  if (!ipm.run()) throw SolverError("feasibility restoration did not converge");
  return finalize(r, ipm).objective_value;
}

// True if a recession direction with negative slope exists.
bool has_descent_direction(const ConvexProgram& p, const Tolerances& tol) {
  const int n = p.num_vars();
  ConvexProgram r = ConvexProgram::free_variables(n);
  r.c = p.c;
  for (int i = 0; i < n; ++i) {
    if (p.q[i] > 0.0) {
      r.lo[i] = r.hi[i] = 0.0;
      continue;
    }
    r.lo[i] = std::isfinite(p.lo[i]) ? 0.0 : -1.0;
    r.hi[i] = std::isfinite(p.hi[i]) ? 0.0 : 1.0;
  }
  r.a_eq = p.a_eq;
  r.b_eq = Vector::Zero(p.a_eq.rows());
  r.a_in = p.a_in;
  r.b_in = Vector::Zero(p.a_in.rows());
  InteriorPoint ipm(r, tol);
  if (!ipm.run()) throw SolverError("recession-direction program did not converge");
  const double slope = finalize(r, ipm).objective_value;
  return slope < -1e-7 * (1.0 + p.c.lpNorm<Eigen::Infinity>());
}

}  // namespace

Solution solve(const ConvexProgram& program, const Tolerances& tol) {
  validate(program);
  // The iteration runs on a copy with the objective scaled to unit size;
  // multipliers are mapped back afterwards.
  const double cost_scale = std::max({1.0, program.q.size() ? program.q.lpNorm<Eigen::Infinity>() : 0.0,
                                      program.c.size() ? program.c.lpNorm<Eigen::Infinity>() : 0.0});
  ConvexProgram scaled = program;
  scaled.q /= cost_scale;
  scaled.c /= cost_scale;
  auto unscale = [&](Solution s) {
    s.objective_value = program.objective(s.x);
    s.eq_multipliers *= cost_scale;
    s.in_multipliers *= cost_scale;
    return s;
  };
  InteriorPoint ipm(scaled, tol);
  int iterations = 0;
  if (ipm.run()) {
    Solution s = finalize(scaled, ipm);
    if (s.primal_residual <= tol.feas && s.kkt_residual <= tol.kkt) {
      // Degenerate pairs, where slack and multiplier vanish together, make
      // the guess ambiguous; it is retried with the threshold shifted.
      for (double kappa : {1.0, 1e-3, 1e3, 1e-6, 1e6})
        if (auto polished = polish(scaled, ipm, tol, kappa)) return unscale(*polished);
      return unscale(s);
    }
    iterations = s.iterations;
  } else {
    iterations = ipm.iterations();
  }

  const double scale = 1.0 + std::max(program.b_eq.size() ? program.b_eq.lpNorm<Eigen::Infinity>() : 0.0,
                                      program.b_in.size() ? program.b_in.lpNorm<Eigen::Infinity>() : 0.0);
  const double violation = restoration_value(program, tol);
  if (violation > 1e-6 * scale) {
    Solution s;
    s.status = Status::kInfeasible;
    s.iterations = iterations;
    s.infeasibility = violation;
    return s;
  }
  if (has_descent_direction(program, tol)) {
    Solution s;
    s.status = Status::kUnbounded;
    s.iterations = iterations;
    return s;
  }
  std::ostringstream os;
  os << "interior point method stalled after " << iterations << " iterations on a feasible, bounded program";
  throw SolverError(os.str());
}

SplitProgram split_abs_program(const AbsProgram& program) {
  const ConvexProgram& p = program.base;
  const int n = p.num_vars();
  if (program.abs_weight.size() != n) throw std::invalid_argument("abs program: weight vector has wrong length");
  if (p.q.size() == n && (p.q.array() != 0.0).any())
    throw std::invalid_argument("abs program: base objective must be linear");
  for (int i = 0; i < n; ++i) {
    if (!(program.abs_weight[i] >= 0.0)) {
      std::ostringstream os;
      os << "abs program: negative absolute-value weight " << program.abs_weight[i] << " on variable " << i;
      throw std::invalid_argument(os.str());
    }
  }

  SplitProgram out;
  out.pos_col.resize(static_cast<std::size_t>(n));
  out.neg_col.assign(static_cast<std::size_t>(n), -1);
  int cols = 0;
  for (int i = 0; i < n; ++i) {
    out.pos_col[static_cast<std::size_t>(i)] = cols++;
    if (program.abs_weight[i] > 0.0) out.neg_col[static_cast<std::size_t>(i)] = cols++;
  }

  ConvexProgram& lp = out.lp;
  lp = ConvexProgram::free_variables(cols);
  lp.offset = p.offset;
  for (int i = 0; i < n; ++i) {
    const int pc = out.pos_col[static_cast<std::size_t>(i)], nc = out.neg_col[static_cast<std::size_t>(i)];
    if (nc < 0) {
      lp.c[pc] = p.c[i];
      lp.lo[pc] = p.lo[i];
      lp.hi[pc] = p.hi[i];
      continue;
    }
    const double w = program.abs_weight[i];
    lp.c[pc] = p.c[i] + w;
    lp.c[nc] = -p.c[i] + w;
    lp.lo[pc] = std::max(p.lo[i], 0.0);
    lp.hi[pc] = std::max(p.hi[i], 0.0);
    lp.lo[nc] = std::max(-p.hi[i], 0.0);
    lp.hi[nc] = std::max(-p.lo[i], 0.0);
  }
  auto expand = [&](const SparseMatrix& a) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < a.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
        const auto col = static_cast<std::size_t>(it.col());
        trip.emplace_back(it.row(), out.pos_col[col], it.value());
        if (out.neg_col[col] >= 0) trip.emplace_back(it.row(), out.neg_col[col], -it.value());
      }
    }
    SparseMatrix m(a.rows(), cols);
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
  };
  lp.a_eq = expand(p.a_eq);
  lp.b_eq = p.b_eq;
  lp.a_in = expand(p.a_in);
  lp.b_in = p.b_in;
  return out;
}

Vector SplitProgram::recombine(const Vector& split) const {
  Vector x(static_cast<Eigen::Index>(pos_col.size()));
  for (std::size_t i = 0; i < pos_col.size(); ++i) {
    double v = split[pos_col[i]];
    if (neg_col[i] >= 0) v -= split[neg_col[i]];
    x[static_cast<Eigen::Index>(i)] = v;
  }
  return x;
}

Solution solve_lp_abs(const AbsProgram& program, const Tolerances& tol) {
  const SplitProgram split = split_abs_program(program);
  Solution s = solve(split.lp, tol);
  if (s.status != Status::kOptimal) return s;
  s.x = split.recombine(s.x);
  s.objective_value = program.base.c.dot(s.x) + program.abs_weight.dot(s.x.cwiseAbs()) + program.base.offset;
  return s;
}

}  // namespace gridclust::opt
