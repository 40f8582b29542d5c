#pragma once

// Convex subproblem solver: quadratic programs with linear equality and
// inequality constraints, variable bounds and optional separable log terms
//
//   minimize    0.5 x'Qx + c'x - sum_k w_k ln(a_k'x + b_k) + const
//   subject to  A x = b,   G x <= h,   l <= x <= u,   a_k'x + b_k >= floor_k
//
// solved with a primal-dual interior point method (Mehrotra predictor-corrector)
// on the regularized quasi-definite KKT system.

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ehub {

using Index = std::ptrdiff_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  Index var;
  double coef;
};

/// -weight * ln(sum coef*x + offset), with the argument kept >= floor.
struct LogTerm {
  double weight = 1.0;
  std::vector<Term> terms;
  double offset = 0.0;
  double floor = 1e-6;
};

class ConvexSubproblem {
 public:
  ConvexSubproblem() = default;
  explicit ConvexSubproblem(Index num_vars);

  /// Appends a variable and returns its index.
  Index add_variable(double lower = -kInf, double upper = kInf);
  Index add_variables(Index count, double lower = -kInf, double upper = kInf);

  void set_bounds(Index var, double lower, double upper);

  /// Adds v * x_i * x_j to 0.5 x'Qx (Q_ij and Q_ji for i != j).
  void add_quadratic(Index i, Index j, double v);
  void add_linear(Index i, double v);
  void add_constant(double v) { constant_ += v; }

  /// rho/2 * (x_i - target)^2
  void add_proximal(Index i, double rho, double target);

  Index add_equality(std::vector<Term> terms, double rhs);
  Index add_inequality(std::vector<Term> terms, double rhs);
  void add_log_term(LogTerm term);

  Index num_vars() const { return static_cast<Index>(lower_.size()); }
  Index num_equalities() const { return static_cast<Index>(eq_rows_.size()); }
  Index num_inequalities() const { return static_cast<Index>(ineq_rows_.size()); }

  double objective(const Eigen::VectorXd& x) const;

  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<double>& linear() const { return linear_; }
  struct QEntry {
    Index row;
    Index col;
    double value;
  };
  const std::vector<QEntry>& quadratic() const { return quad_; }
  const std::vector<std::vector<Term>>& equality_rows() const { return eq_rows_; }
  const std::vector<double>& equality_rhs() const { return eq_rhs_; }
  const std::vector<std::vector<Term>>& inequality_rows() const { return ineq_rows_; }
  const std::vector<double>& inequality_rhs() const { return ineq_rhs_; }
  const std::vector<LogTerm>& log_terms() const { return log_terms_; }
  double constant() const { return constant_; }

  /// Largest violation of equalities, inequalities and bounds at x.
  double max_violation(const Eigen::VectorXd& x) const;

 private:
  void check_var(Index i) const;

  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> linear_;
  std::vector<QEntry> quad_;  // stored with row >= col
  std::vector<std::vector<Term>> eq_rows_;
  std::vector<double> eq_rhs_;
  std::vector<std::vector<Term>> ineq_rows_;
  std::vector<double> ineq_rhs_;
  std::vector<LogTerm> log_terms_;
  double constant_ = 0.0;
};

enum class SolveStatus { optimal, max_iter, infeasible };

std::string to_string(SolveStatus status);

struct SolveOptions {
  double tolerance = 1e-7;
  int max_iterations = 100;
};

struct SolveReport {
  Eigen::VectorXd x;
  double objective = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::max_iter;
  /// Multipliers y of A x = b in the Lagrangian f(x) - y'(Ax - b).
  Eigen::VectorXd equality_duals;

  bool ok() const { return status == SolveStatus::optimal; }
};

/// Solves the subproblem. A non-empty warm start seeds the primal iterate.
SolveReport solve(const ConvexSubproblem& problem, const SolveOptions& options = {},
                  std::span<const double> warm_start = {});

}  // namespace ehub
