#include "ehub/solver.hpp"

#include "ehub/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <string>

namespace ehub {

ConvexSubproblem::ConvexSubproblem(Index num_vars) { add_variables(num_vars); }

Index ConvexSubproblem::add_variable(double lower, double upper) {
  if (lower > upper) throw ValidationError("variable bounds: lower > upper");
  lower_.push_back(lower);
  upper_.push_back(upper);
  linear_.push_back(0.0);
  return num_vars() - 1;
}

Index ConvexSubproblem::add_variables(Index count, double lower, double upper) {
  const Index first = num_vars();
  for (Index k = 0; k < count; ++k) add_variable(lower, upper);
  return first;
}

void ConvexSubproblem::check_var(Index i) const {
  if (i < 0 || i >= num_vars()) throw ValidationError("variable index out of range");
}

void ConvexSubproblem::set_bounds(Index var, double lower, double upper) {
  check_var(var);
  if (lower > upper) throw ValidationError("variable bounds: lower > upper");
  lower_[var] = lower;
  upper_[var] = upper;
}

void ConvexSubproblem::add_quadratic(Index i, Index j, double v) {
  check_var(i);
  check_var(j);
  if (i < j) std::swap(i, j);
  quad_.push_back({i, j, v});
}

void ConvexSubproblem::add_linear(Index i, double v) {
  check_var(i);
  linear_[i] += v;
}

void ConvexSubproblem::add_proximal(Index i, double rho, double target) {
  add_quadratic(i, i, rho);
  add_linear(i, -rho * target);
  add_constant(0.5 * rho * target * target);
}

Index ConvexSubproblem::add_equality(std::vector<Term> terms, double rhs) {
  for (const auto& t : terms) check_var(t.var);
  eq_rows_.push_back(std::move(terms));
  eq_rhs_.push_back(rhs);
  return num_equalities() - 1;
}

Index ConvexSubproblem::add_inequality(std::vector<Term> terms, double rhs) {
  for (const auto& t : terms) check_var(t.var);
  ineq_rows_.push_back(std::move(terms));
  ineq_rhs_.push_back(rhs);
  return num_inequalities() - 1;
}

void ConvexSubproblem::add_log_term(LogTerm term) {
  if (!(term.weight > 0.0)) throw ValidationError("log term weight must be positive");
  if (!(term.floor > 0.0)) throw ValidationError("log term floor must be positive");
  for (const auto& t : term.terms) check_var(t.var);
  log_terms_.push_back(std::move(term));
}

namespace {

double row_value(const std::vector<Term>& row, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (const auto& t : row) s += t.coef * x[t.var];
  return s;
}

}  // namespace

double ConvexSubproblem::objective(const Eigen::VectorXd& x) const {
  double f = constant_;
  for (Index i = 0; i < num_vars(); ++i) f += linear_[i] * x[i];
  for (const auto& q : quad_) {
    const double w = (q.row == q.col) ? 0.5 : 1.0;
    f += w * q.value * x[q.row] * x[q.col];
  }
  for (const auto& lt : log_terms_) {
    const double arg = row_value(lt.terms, x) + lt.offset;
    f -= lt.weight * std::log(arg);
  }
  return f;
}

double ConvexSubproblem::max_violation(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (Index i = 0; i < num_vars(); ++i) {
    v = std::max(v, lower_[i] - x[i]);
    v = std::max(v, x[i] - upper_[i]);
  }
  for (std::size_t r = 0; r < eq_rows_.size(); ++r)
    v = std::max(v, std::abs(row_value(eq_rows_[r], x) - eq_rhs_[r]));
  for (std::size_t r = 0; r < ineq_rows_.size(); ++r)
    v = std::max(v, row_value(ineq_rows_[r], x) - ineq_rhs_[r]);
  for (const auto& lt : log_terms_)
    v = std::max(v, lt.floor - (row_value(lt.terms, x) + lt.offset));
  return v;
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::max_iter:
      return "max_iter";
    case SolveStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Interior point standard form after eliminating fixed variables:
//   min 0.5 v'Qv + c'v - sum weight_k ln(v_{w_k})   s.t.  A v = b,  lo <= v <= hi
// with v = [free original vars | inequality slacks | log arguments].
struct StandardForm {
  Index nx = 0;  // reduced original variables
  Index ns = 0;
  Index nw = 0;
  Index n = 0;
  Index m = 0;
  SpMat Q;  // lower triangle, n x n
  SpMat A;  // m x n
  Vec b;
  Vec c;
  Vec lo;
  Vec hi;
  std::vector<double> log_weight;
  std::vector<Index> reduced_of;  // original var -> reduced index or -1
  std::vector<double> fixed_value;
  std::vector<Index> eq_row_of;   // original equality row -> reduced row or -1
};

StandardForm to_standard_form(const ConvexSubproblem& p) {
  StandardForm sf;
  const Index n0 = p.num_vars();
  sf.reduced_of.assign(n0, -1);
  sf.fixed_value.assign(n0, 0.0);
  for (Index i = 0; i < n0; ++i) {
    const double lo = p.lower()[i];
    const double hi = p.upper()[i];
    // near-degenerate boxes are fixed at their midpoint
    if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
      sf.fixed_value[i] = lo == hi ? lo : 0.5 * (lo + hi);
    } else {
      sf.reduced_of[i] = sf.nx++;
    }
  }
  sf.ns = p.num_inequalities();
  sf.nw = static_cast<Index>(p.log_terms().size());
  sf.n = sf.nx + sf.ns + sf.nw;

  sf.c = Vec::Zero(sf.n);
  sf.lo = Vec::Constant(sf.n, -kInf);
  sf.hi = Vec::Constant(sf.n, kInf);
  for (Index i = 0; i < n0; ++i) {
    const Index r = sf.reduced_of[i];
    if (r < 0) continue;
    sf.c[r] = p.linear()[i];
    sf.lo[r] = p.lower()[i];
    sf.hi[r] = p.upper()[i];
  }

  std::vector<Eigen::Triplet<double>> qt;
  for (const auto& q : p.quadratic()) {
    const Index ri = sf.reduced_of[q.row];
    const Index rj = sf.reduced_of[q.col];
    if (ri >= 0 && rj >= 0) {
      qt.emplace_back(std::max(ri, rj), std::min(ri, rj), q.value);
    } else if (ri >= 0) {
      sf.c[ri] += q.value * sf.fixed_value[q.col];
    } else if (rj >= 0) {
      sf.c[rj] += q.value * sf.fixed_value[q.row];
    }
  }
  sf.Q.resize(sf.n, sf.n);
  sf.Q.setFromTriplets(qt.begin(), qt.end());

  std::vector<Eigen::Triplet<double>> at;
  std::vector<double> rhs;
  Index row = 0;
  auto add_row = [&](const std::vector<Term>& terms, double r, Index slack) -> Index {
    double shifted = r;
    bool any = false;
    for (const auto& t : terms) {
      const Index ri = sf.reduced_of[t.var];
      if (ri >= 0) {
        if (t.coef != 0.0) any = true;
        at.emplace_back(row, ri, t.coef);
      } else {
        shifted -= t.coef * sf.fixed_value[t.var];
      }
    }
    if (slack >= 0) {
      at.emplace_back(row, slack, 1.0);
      any = true;
    }
    if (!any) {
      if (std::abs(shifted) > 1e-9 * (1.0 + std::abs(r)))
        throw InfeasibleError("constraint violated by fixed variables");
      // drop the empty row
      at.erase(std::remove_if(at.begin(), at.end(),
                              [&](const auto& tr) { return tr.row() == row; }),
               at.end());
      return -1;
    }
    rhs.push_back(shifted);
    return row++;
  };

  sf.eq_row_of.assign(p.num_equalities(), -1);
  for (Index r = 0; r < p.num_equalities(); ++r)
    sf.eq_row_of[r] = add_row(p.equality_rows()[r], p.equality_rhs()[r], -1);
  for (Index r = 0; r < p.num_inequalities(); ++r) {
    const Index slack = sf.nx + r;
    sf.lo[slack] = 0.0;
    add_row(p.inequality_rows()[r], p.inequality_rhs()[r], slack);
  }
  for (Index k = 0; k < sf.nw; ++k) {
    const auto& lt = p.log_terms()[k];
    const Index w = sf.nx + sf.ns + k;
    sf.lo[w] = lt.floor;
    sf.log_weight.push_back(lt.weight);
    std::vector<Term> terms = lt.terms;
    // a'x - w = -offset
    const Index r = row;
    double shifted = -lt.offset;
    for (const auto& t : terms) {
      const Index ri = sf.reduced_of[t.var];
      if (ri >= 0)
        at.emplace_back(r, ri, t.coef);
      else
        shifted -= t.coef * sf.fixed_value[t.var];
    }
    at.emplace_back(r, w, -1.0);
    rhs.push_back(shifted);
    ++row;
  }
  sf.m = row;
  sf.A.resize(sf.m, sf.n);
  sf.A.setFromTriplets(at.begin(), at.end());
  sf.b = Eigen::Map<const Vec>(rhs.data(), static_cast<Index>(rhs.size()));
  return sf;
}

// Lower-triangular KKT matrix with a fixed sparsity pattern; only the
// diagonal of the (1,1) block changes between iterations.
class KktSystem {
 public:
  KktSystem(const StandardForm& sf, double reg_primal, double reg_dual)
      : n_(sf.n), m_(sf.m), base_reg_p_(reg_primal), base_reg_d_(reg_dual), reg_p_(reg_primal), reg_d_(reg_dual) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(sf.Q.nonZeros() + sf.A.nonZeros() + n_ + m_);
    for (Index i = 0; i < n_ + m_; ++i) t.emplace_back(i, i, 0.0);
    for (Index k = 0; k < sf.Q.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.Q, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (Index k = 0; k < sf.A.outerSize(); ++k)
      for (SpMat::InnerIterator it(sf.A, k); it; ++it)
        t.emplace_back(n_ + it.row(), it.col(), it.value());
    base_.resize(n_ + m_, n_ + m_);
    base_.setFromTriplets(t.begin(), t.end());
    base_.makeCompressed();
    diag_pos_.resize(n_ + m_);
    for (Index j = 0; j < n_ + m_; ++j) {
      // column-major lower storage: the diagonal is the first entry of each column
      const Index start = base_.outerIndexPtr()[j];
      diag_pos_[j] = start;
      base_diag_.push_back(base_.valuePtr()[start]);
    }
    kkt_ = base_;
    ldlt_.analyzePattern(kkt_);
  }

  // Exact zero pivots from cancellation are retried with a larger shift;
  // refinement against the unshifted matrix removes most of the bias.
  bool factorize(const Vec& diag11) {
    for (double scale = 1.0; scale <= 1e5; scale *= 10.0) {
      reg_p_ = base_reg_p_ * scale;
      reg_d_ = base_reg_d_ * scale;
      for (Index j = 0; j < n_; ++j) kkt_.valuePtr()[diag_pos_[j]] = base_diag_[j] + diag11[j] + reg_p_;
      for (Index j = 0; j < m_; ++j) kkt_.valuePtr()[diag_pos_[n_ + j]] = -reg_d_;
      ldlt_.factorize(kkt_);
      if (ldlt_.info() == Eigen::Success && ldlt_.vectorD().allFinite()) return true;
    }
    return false;
  }

  // Solves the unregularized system with iterative refinement.
  Vec solve(const Vec& rhs) const {
    Vec sol = ldlt_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      Vec res = rhs - multiply(sol);
      if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      sol += ldlt_.solve(res);
    }
    return sol;
  }

 private:
  Vec multiply(const Vec& v) const {
    Vec out = kkt_.selfadjointView<Eigen::Lower>() * v;
    out.head(n_) -= reg_p_ * v.head(n_);
    out.tail(m_) += reg_d_ * v.tail(m_);
    return out;
  }

  Index n_;
  Index m_;
  double base_reg_p_;
  double base_reg_d_;
  double reg_p_;
  double reg_d_;
  SpMat base_;
  SpMat kkt_;
  std::vector<Index> diag_pos_;
  std::vector<double> base_diag_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double max_step(const Vec& gap, const Vec& dgap, const std::vector<Index>& idx) {
  double alpha = 1.0;
  for (Index i : idx)
    if (dgap[i] < 0.0) alpha = std::min(alpha, -gap[i] / dgap[i]);
  return alpha;
}

}  // namespace

SolveReport solve(const ConvexSubproblem& problem, const SolveOptions& options,
                  std::span<const double> warm_start) {
  SolveReport report;
  const Index n0 = problem.num_vars();
  if (!warm_start.empty() && static_cast<Index>(warm_start.size()) != n0)
    throw ValidationError("warm start has wrong dimension");

  StandardForm sf;
  try {
    sf = to_standard_form(problem);
  } catch (const InfeasibleError&) {
    report.status = SolveStatus::infeasible;
    report.x = Vec::Zero(n0);
    report.equality_duals = Vec::Zero(problem.num_equalities());
    return report;
  }

  const Index n = sf.n;
  const Index m = sf.m;
  const double tol = options.tolerance;

  std::vector<Index> has_lo, has_hi;
  for (Index i = 0; i < n; ++i) {
    if (std::isfinite(sf.lo[i])) has_lo.push_back(i);
    if (std::isfinite(sf.hi[i])) has_hi.push_back(i);
  }
  const double nb = static_cast<double>(has_lo.size() + has_hi.size());

  // Initial point
  Vec v = Vec::Zero(n);
  for (Index i = 0; i < n0; ++i) {
    const Index r = sf.reduced_of[i];
    if (r >= 0 && !warm_start.empty()) v[r] = warm_start[i];
  }
  {
    Vec full = Vec::Zero(n0);
    for (Index i = 0; i < n0; ++i) {
      const Index r = sf.reduced_of[i];
      full[i] = r >= 0 ? v[r] : sf.fixed_value[i];
    }
    for (Index r = 0; r < sf.ns; ++r)
      v[sf.nx + r] = problem.inequality_rhs()[r] - row_value(problem.inequality_rows()[r], full);
    for (Index k = 0; k < sf.nw; ++k) {
      const auto& lt = problem.log_terms()[k];
      v[sf.nx + sf.ns + k] = row_value(lt.terms, full) + lt.offset;
    }
  }
  for (Index i = 0; i < n; ++i) {
    const double lo = sf.lo[i];
    const double hi = sf.hi[i];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      const double margin = std::min(0.1 * (hi - lo), 1.0);
      v[i] = std::clamp(v[i], lo + margin, hi - margin);
    } else if (std::isfinite(lo)) {
      v[i] = std::max(v[i], lo + 1.0);
    } else if (std::isfinite(hi)) {
      v[i] = std::min(v[i], hi - 1.0);
    }
  }
  Vec y = Vec::Zero(m);
  Vec zl = Vec::Zero(n);
  Vec zu = Vec::Zero(n);
  for (Index i : has_lo) zl[i] = 1.0;
  for (Index i : has_hi) zu[i] = 1.0;

  KktSystem kkt(sf, 1e-9, 1e-9);
  const SpMat At = sf.A.transpose();
  const double b_norm = sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0;
  const double c_norm = sf.c.size() ? sf.c.lpNorm<Eigen::Infinity>() : 0.0;
  const Index wbeg = sf.nx + sf.ns;

  auto gradient = [&](const Vec& vv) {
    Vec g = sf.Q.selfadjointView<Eigen::Lower>() * vv + sf.c;
    for (Index k = 0; k < sf.nw; ++k) g[wbeg + k] -= sf.log_weight[k] / vv[wbeg + k];
    return g;
  };

  Vec dl = Vec::Zero(n);
  Vec du = Vec::Zero(n);
  double rp_norm = 0.0;
  double rd_norm = 0.0;
  double mu = 0.0;
  double best_rp = kInf;
  int stall = 0;
  int iter = 0;
  SolveStatus status = SolveStatus::max_iter;

  for (; iter <= options.max_iterations; ++iter) {
    const Vec g = gradient(v);
    const Vec rd = g - At * y - zl + zu;
    const Vec rp = sf.A * v - sf.b;
    dl.setZero();
    du.setZero();
    for (Index i : has_lo) dl[i] = v[i] - sf.lo[i];
    for (Index i : has_hi) du[i] = sf.hi[i] - v[i];
    mu = nb > 0 ? (zl.dot(dl) + zu.dot(du)) / nb : 0.0;
    rp_norm = m ? rp.lpNorm<Eigen::Infinity>() : 0.0;
    rd_norm = n ? rd.lpNorm<Eigen::Infinity>() : 0.0;

    if (rp_norm <= tol * (1.0 + b_norm) && rd_norm <= tol * (1.0 + c_norm) && mu <= tol) {
      status = SolveStatus::optimal;
      break;
    }
    if (iter == options.max_iterations) break;
    if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > 1e12 || y.lpNorm<Eigen::Infinity>() > 1e14) {
      status = SolveStatus::infeasible;
      break;
    }
    if (rp_norm < 0.5 * best_rp) {
      best_rp = rp_norm;
      stall = 0;
    } else if (++stall > 25 && rp_norm > 1e3 * tol * (1.0 + b_norm) && mu < tol) {
      status = SolveStatus::infeasible;
      break;
    }

    Vec diag = Vec::Zero(n);
    for (Index i : has_lo) diag[i] += zl[i] / dl[i];
    for (Index i : has_hi) diag[i] += zu[i] / du[i];
    for (Index k = 0; k < sf.nw; ++k) {
      const double w = v[wbeg + k];
      diag[wbeg + k] += sf.log_weight[k] / (w * w);
    }
    if (!kkt.factorize(diag)) {
      status = SolveStatus::infeasible;
      break;
    }

    auto solve_direction = [&](const Vec& rhs1, Vec& dv, Vec& dy) {
      Vec rhs(n + m);
      rhs.head(n) = rhs1;
      rhs.tail(m) = -rp;
      const Vec sol = kkt.solve(rhs);
      dv = sol.head(n);
      dy = -sol.tail(m);
    };

    // Predictor
    Vec rhs1 = -rd;
    for (Index i : has_lo) rhs1[i] -= zl[i];
    for (Index i : has_hi) rhs1[i] += zu[i];
    Vec dv_a, dy_a;
    solve_direction(rhs1, dv_a, dy_a);
    Vec dzl_a = Vec::Zero(n);
    Vec dzu_a = Vec::Zero(n);
    for (Index i : has_lo) dzl_a[i] = -zl[i] - zl[i] * dv_a[i] / dl[i];
    for (Index i : has_hi) dzu_a[i] = -zu[i] + zu[i] * dv_a[i] / du[i];

    const Vec neg_dv_a = -dv_a;
    const double ap_a = std::min(max_step(dl, dv_a, has_lo), max_step(du, neg_dv_a, has_hi));
    const double ad_a = std::min(max_step(zl, dzl_a, has_lo), max_step(zu, dzu_a, has_hi));
    double mu_aff = 0.0;
    for (Index i : has_lo) mu_aff += (dl[i] + ap_a * dv_a[i]) * (zl[i] + ad_a * dzl_a[i]);
    for (Index i : has_hi) mu_aff += (du[i] - ap_a * dv_a[i]) * (zu[i] + ad_a * dzu_a[i]);
    mu_aff = nb > 0 ? mu_aff / nb : 0.0;
    const double sigma = mu > 0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;
    const double smu = sigma * mu;

    // Corrector
    rhs1 = -rd;
    for (Index i : has_lo) rhs1[i] += (smu - dv_a[i] * dzl_a[i]) / dl[i] - zl[i];
    for (Index i : has_hi) rhs1[i] -= (smu + dv_a[i] * dzu_a[i]) / du[i] - zu[i];
    Vec dv, dy;
    solve_direction(rhs1, dv, dy);
    Vec dzl = Vec::Zero(n);
    Vec dzu = Vec::Zero(n);
    for (Index i : has_lo) dzl[i] = (smu - dl[i] * zl[i] - dv_a[i] * dzl_a[i] - zl[i] * dv[i]) / dl[i];
    for (Index i : has_hi) dzu[i] = (smu - du[i] * zu[i] + dv_a[i] * dzu_a[i] + zu[i] * dv[i]) / du[i];

    const double tau = std::max(0.9, 1.0 - mu);
    const Vec neg_dv = -dv;
    const double ap = std::min(max_step(dl, dv, has_lo), max_step(du, neg_dv, has_hi));
    const double ad = std::min(max_step(zl, dzl, has_lo), max_step(zu, dzu, has_hi));
    const double alpha = std::min(1.0, tau * std::min(ap, ad));

    v += alpha * dv;
    y += alpha * dy;
    zl += alpha * dzl;
    zu += alpha * dzu;
  }

  report.status = status;
  report.iterations = iter;
  report.primal_infeasibility = rp_norm;
  report.dual_infeasibility = rd_norm;
  report.complementarity = mu;
  report.x.resize(n0);
  for (Index i = 0; i < n0; ++i) {
    const Index r = sf.reduced_of[i];
    report.x[i] = r >= 0 ? v[r] : sf.fixed_value[i];
  }
  report.equality_duals = Vec::Zero(problem.num_equalities());
  for (Index r = 0; r < problem.num_equalities(); ++r)
    if (sf.eq_row_of[r] >= 0) report.equality_duals[r] = y[sf.eq_row_of[r]];
  report.objective = problem.objective(report.x);
  return report;
}

}  // namespace ehub
