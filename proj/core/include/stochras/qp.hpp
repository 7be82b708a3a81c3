#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stochras/types.hpp"

namespace stochras::qp {

inline constexpr int kMaxVars = 8;
inline constexpr int kMaxIneq = 32;

using IneqMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kMaxIneq,
                              kMaxVars>;
using IneqVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxIneq, 1>;

/// min 1/2 u^T H u + c^T u  s.t.  A u <= b,  lb <= u <= ub.
/// H must be symmetric positive definite. Infinite bounds are allowed.
struct QpProblem {
  Mat H;
  Vec c;
  IneqMat A;  ///< m x n, m <= kMaxIneq
  IneqVec b;
  Vec lb;
  Vec ub;

  /// Problem with n variables, no constraints and infinite bounds.
  static QpProblem unconstrained(const Mat& H, const Vec& c);
  void add_row(const Vec& a, double rhs);
  int num_vars() const { return static_cast<int>(c.size()); }
  int num_ineq() const { return static_cast<int>(A.rows()); }
};

enum class Status { Optimal, Infeasible };

/// Constraint indices in active_set / multipliers:
///   [0, m)          rows of A
///   [m, m + n)      lower bounds
///   [m + n, m + 2n) upper bounds
struct QpSolution {
  Status status = Status::Infeasible;
  Vec u_star;
  double objective = 0.0;
  std::vector<int> active_set;
  std::vector<double> multipliers;  ///< aligned with active_set
  double max_violation = 0.0;
  double stationarity_residual = 0.0;
  bool used_enumeration = false;
  int iterations = 0;
};

struct SolveOptions {
  /// Optional warm-start working set (same index convention as active_set).
  std::optional<std::vector<int>> active_set_hint;
  /// Force the exhaustive active-set enumeration path (testing).
  bool force_enumeration = false;
};

/// Validates the problem (symmetry, Cholesky of H, lb <= ub, size caps) and
/// returns the unique minimizer or Infeasible. Throws ConfigError on invalid
/// input and NumericalError when both the active-set iteration and the
/// enumeration fallback fail.
QpSolution solve(const QpProblem& problem, const SolveOptions& options = {});

std::string describe_constraint(const QpProblem& problem, int index);

}  // namespace stochras::qp
