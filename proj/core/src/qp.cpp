#include "stochras/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stochras::qp {

namespace {

// Phase 1 adds one slack variable; bounds become rows.
constexpr int kWorkVars = kMaxVars + 1;
constexpr int kWorkRows = kMaxIneq + 2 * kMaxVars + 1;

using WVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kWorkVars, 1>;
using WMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kWorkVars,
                           kWorkVars>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor, kWorkRows,
                             kWorkVars>;
using RowVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kWorkRows, 1>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inequality-only QP in standard form: min 1/2 x^T H x + c^T x, rows x <= rhs.
struct Standard {
  WMat H;
  WVec c;
  RowMat rows;
  RowVec rhs;
  std::vector<int> origin;  // index in the caller's convention
};

struct EqpResult {
  bool ok = false;
  WVec x;
  WVec lambda;
};

// min 1/2 x^T H x + c^T x  s.t. rows_W x = rhs_W, via Cholesky of H and of the
// Schur complement S = A_W H^{-1} A_W^T.
EqpResult solve_eqp(const Standard& s, const Eigen::LLT<WMat>& chol,
                    const std::vector<int>& working) {
  const Eigen::Index n = s.c.size();
  const Eigen::Index k = static_cast<Eigen::Index>(working.size());
  EqpResult out;
  WVec hinv_c = chol.solve(s.c);
  if (k == 0) {
    out.x = -hinv_c;
    out.lambda.resize(0);
    out.ok = true;
    return out;
  }
  WMat aw(k, n);
  WVec bw(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    aw.row(i) = s.rows.row(working[i]);
    bw(i) = s.rhs(working[i]);
  }
  WMat y = chol.solve(WMat(aw.transpose()));
  WMat schur = aw * y;
  Eigen::LLT<WMat> schur_chol(schur);
  if (schur_chol.info() != Eigen::Success) return out;
  // Reject near-singular Schur complements; LLT alone accepts tiny pivots.
  const double diag_max = schur.diagonal().cwiseAbs().maxCoeff();
  const double piv_min = WVec(schur_chol.matrixL().toDenseMatrix().diagonal()).minCoeff();
  if (!(piv_min * piv_min > 1e-14 * std::max(diag_max, 1e-300))) return out;
  out.lambda = -schur_chol.solve(WVec(bw + aw * hinv_c));
  out.x = -chol.solve(WVec(s.c + aw.transpose() * out.lambda));
  out.ok = out.x.allFinite() && out.lambda.allFinite();
  return out;
}

double row_scale(const Standard& s, Eigen::Index j) {
  return 1.0 + s.rows.row(j).cwiseAbs().maxCoeff() + std::abs(s.rhs(j));
}

double max_violation(const Standard& s, const WVec& x) {
  double v = 0.0;
  for (Eigen::Index j = 0; j < s.rows.rows(); ++j)
    v = std::max(v, (s.rows.row(j).dot(x) - s.rhs(j)) / row_scale(s, j));
  return v;
}

struct ActiveSetResult {
  enum class Kind { Optimal, Failed } kind = Kind::Failed;
  WVec x;
  std::vector<int> working;
  WVec lambda;
  int iterations = 0;
};

// Primal active-set iteration from a feasible x.
ActiveSetResult primal_active_set(const Standard& s, const Eigen::LLT<WMat>& chol, WVec x,
                                  std::vector<int> working) {
  ActiveSetResult out;
  const Eigen::Index m = s.rows.rows();
  const int max_iter = 20 * static_cast<int>(m + s.c.size()) + 20;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    EqpResult eqp = solve_eqp(s, chol, working);
    if (!eqp.ok) return out;
    WVec p = eqp.x - x;
    const double step_tol = 1e-13 * (1.0 + x.norm());
    if (p.norm() <= step_tol) {
      x = eqp.x;
      int drop = -1;
      double most_negative = -1e-12;
      for (std::size_t i = 0; i < working.size(); ++i) {
        if (eqp.lambda(static_cast<Eigen::Index>(i)) < most_negative) {
          most_negative = eqp.lambda(static_cast<Eigen::Index>(i));
          drop = static_cast<int>(i);
        }
      }
      if (drop < 0) {
        out.kind = ActiveSetResult::Kind::Optimal;
        out.x = x;
        out.working = working;
        out.lambda = eqp.lambda;
        return out;
      }
      working.erase(working.begin() + drop);
      continue;
    }
    double alpha = 1.0;
    int blocking = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (std::find(working.begin(), working.end(), static_cast<int>(j)) != working.end()) continue;
      const double ap = s.rows.row(j).dot(p);
      if (ap <= 1e-14 * row_scale(s, j) * (1.0 + p.norm())) continue;
      const double room = std::max(0.0, s.rhs(j) - s.rows.row(j).dot(x));
      const double step = room / ap;
      if (step < alpha) {
        alpha = step;
        blocking = static_cast<int>(j);
      }
    }
    x += alpha * p;
    if (blocking >= 0) working.push_back(blocking);
  }
  return out;
}

// Every subset of at most n rows; the first KKT point found is the unique
// optimum of a strictly convex problem.
ActiveSetResult enumerate_active_sets(const Standard& s, const Eigen::LLT<WMat>& chol) {
  ActiveSetResult out;
  const int m = static_cast<int>(s.rows.rows());
  const int n = static_cast<int>(s.c.size());
  constexpr long long kMaxCandidates = 20'000'000;
  long long tried = 0;
  std::vector<int> subset;
  for (int size = 0; size <= std::min(n, m); ++size) {
    subset.resize(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) subset[static_cast<std::size_t>(i)] = i;
    while (true) {
      if (++tried > kMaxCandidates) return out;
      EqpResult eqp = solve_eqp(s, chol, subset);
      if (eqp.ok && max_violation(s, eqp.x) <= 1e-10 &&
          (eqp.lambda.size() == 0 || eqp.lambda.minCoeff() >= -1e-10)) {
        out.kind = ActiveSetResult::Kind::Optimal;
        out.x = eqp.x;
        out.working = subset;
        out.lambda = eqp.lambda;
        out.iterations = static_cast<int>(std::min<long long>(tried, 1 << 30));
        return out;
      }
      // next combination in lexicographic order
      int i = size - 1;
      while (i >= 0 && subset[static_cast<std::size_t>(i)] == m - size + i) --i;
      if (i < 0) break;
      ++subset[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

void validate(const QpProblem& p) {
  const int n = p.num_vars();
  if (n < 1 || n > kMaxVars) throw ConfigError("QP variable count out of range [1, 8]");
  if (p.num_ineq() > kMaxIneq) throw ConfigError("QP has more than 32 inequality rows");
  if (p.H.rows() != n || p.H.cols() != n) throw ConfigError("QP Hessian has wrong shape");
  if (p.A.cols() != n && p.A.rows() > 0) throw ConfigError("QP constraint matrix has wrong width");
  if (p.b.size() != p.A.rows()) throw ConfigError("QP rhs length differs from row count");
  if (p.lb.size() != n || p.ub.size() != n) throw ConfigError("QP bounds have wrong length");
  if (!p.H.allFinite() || !p.c.allFinite() || !p.A.allFinite() || !p.b.allFinite())
    throw ConfigError("QP data must be finite");
  const double asym = (p.H - p.H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, p.H.cwiseAbs().maxCoeff()))
    throw ConfigError("QP Hessian is not symmetric");
  for (int i = 0; i < n; ++i) {
    if (std::isnan(p.lb(i)) || std::isnan(p.ub(i)) || p.lb(i) > p.ub(i))
      throw ConfigError("QP box bounds need lb <= ub");
  }
}

Standard to_standard(const QpProblem& p) {
  const int n = p.num_vars();
  const int m = p.num_ineq();
  Standard s;
  s.H = p.H;
  s.c = p.c;
  int count = m;
  for (int i = 0; i < n; ++i) count += (p.lb(i) > -kInf) + (p.ub(i) < kInf);
  s.rows.setZero(count, n);
  s.rhs.resize(count);
  int r = 0;
  for (int j = 0; j < m; ++j, ++r) {
    s.rows.row(r) = p.A.row(j);
    s.rhs(r) = p.b(j);
    s.origin.push_back(j);
  }
  for (int i = 0; i < n; ++i) {
    if (p.lb(i) > -kInf) {
      s.rows(r, i) = -1.0;
      s.rhs(r) = -p.lb(i);
      s.origin.push_back(m + i);
      ++r;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (p.ub(i) < kInf) {
      s.rows(r, i) = 1.0;
      s.rhs(r) = p.ub(i);
      s.origin.push_back(m + n + i);
      ++r;
    }
  }
  return s;
}

// Phase 1: min rho t + 1/2 (|x|^2 + t^2) s.t. rows x - t <= rhs, -t <= 0,
// with every row scaled to unit norm so t is a distance-like violation.
// rho t is an exact penalty: once rho exceeds the multipliers of the
// min-norm feasibility problem (of order |x| after scaling) the optimum has
// t = 0. rho stays moderate because rho * 1e-16 limits how finely t resolves.
std::optional<WVec> find_feasible_point(const Standard& s, int* iterations) {
  const Eigen::Index n = s.c.size();
  const Eigen::Index m = s.rows.rows();
  Standard ph;
  ph.H = WMat::Identity(n + 1, n + 1);
  ph.c = WVec::Zero(n + 1);
  ph.rows.setZero(m + 1, n + 1);
  ph.rhs.resize(m + 1);
  double rhs_scale = 1.0;
  Eigen::Index r = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double norm = s.rows.row(j).norm();
    if (norm == 0.0) {
      if (s.rhs(j) < -1e-14) return std::nullopt;  // 0 <= negative
      continue;
    }
    ph.rows.row(r).head(n) = s.rows.row(j) / norm;
    ph.rows(r, n) = -1.0;
    ph.rhs(r) = s.rhs(j) / norm;
    rhs_scale = std::max(rhs_scale, std::abs(ph.rhs(r)));
    ++r;
  }
  ph.rows(r, n) = -1.0;
  ph.rhs(r) = 0.0;
  ph.rows.conservativeResize(r + 1, n + 1);
  ph.rhs.conservativeResize(r + 1);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < r; ++j) worst = std::max(worst, -ph.rhs(j));
  Eigen::LLT<WMat> chol(ph.H);

  for (double rho = 1.0; rho <= 1e4; rho *= 1e2) {
    ph.c(n) = rho * rhs_scale;
    WVec z = WVec::Zero(n + 1);
    z(n) = worst;
    ActiveSetResult res = primal_active_set(ph, chol, z, {});
    if (res.kind != ActiveSetResult::Kind::Optimal) {
      res = enumerate_active_sets(ph, chol);
      if (res.kind != ActiveSetResult::Kind::Optimal)
        throw NumericalError("QP phase 1 failed to converge");
    }
    *iterations += res.iterations;
    if (res.x(n) <= 1e-11 * rhs_scale) return WVec(res.x.head(n));
  }
  return std::nullopt;
}

}  // namespace

QpProblem QpProblem::unconstrained(const Mat& H, const Vec& c) {
  QpProblem p;
  p.H = H;
  p.c = c;
  p.A.resize(0, c.size());
  p.b.resize(0);
  p.lb = Vec::Constant(c.size(), -kInf);
  p.ub = Vec::Constant(c.size(), kInf);
  return p;
}

void QpProblem::add_row(const Vec& a, double rhs) {
  if (A.rows() >= kMaxIneq) throw ConfigError("QP has more than 32 inequality rows");
  const Eigen::Index r = A.rows();
  A.conservativeResize(r + 1, c.size());
  b.conservativeResize(r + 1);
  A.row(r) = a.transpose();
  b(r) = rhs;
}

QpSolution solve(const QpProblem& problem, const SolveOptions& options) {
  validate(problem);
  const int n = problem.num_vars();
  Standard s = to_standard(problem);
  Eigen::LLT<WMat> chol(s.H);
  if (chol.info() != Eigen::Success || chol.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0)
    throw ConfigError("QP Hessian is not positive definite (Cholesky failed)");

  QpSolution sol;
  ActiveSetResult res;
  bool have_start = false;
  WVec start;
  std::vector<int> start_working;

  if (options.active_set_hint && !options.force_enumeration) {
    std::vector<int> hint;
    for (int idx : *options.active_set_hint) {
      auto it = std::find(s.origin.begin(), s.origin.end(), idx);
      if (it != s.origin.end()) hint.push_back(static_cast<int>(it - s.origin.begin()));
    }
    std::sort(hint.begin(), hint.end());
    hint.erase(std::unique(hint.begin(), hint.end()), hint.end());
    if (static_cast<int>(hint.size()) <= n) {
      EqpResult eqp = solve_eqp(s, chol, hint);
      if (eqp.ok && max_violation(s, eqp.x) <= 1e-12) {
        have_start = true;
        start = eqp.x;
        start_working = hint;
      }
    }
  }
  if (!have_start) {
    std::optional<WVec> feasible = find_feasible_point(s, &sol.iterations);
    if (!feasible) {
      sol.status = Status::Infeasible;
      return sol;
    }
    start = *feasible;
  }

  if (!options.force_enumeration) {
    res = primal_active_set(s, chol, start, start_working);
    sol.iterations += res.iterations;
  }
  if (res.kind != ActiveSetResult::Kind::Optimal) {
    res = enumerate_active_sets(s, chol);
    sol.used_enumeration = true;
    if (res.kind != ActiveSetResult::Kind::Optimal)
      throw NumericalError("QP active-set iteration and enumeration fallback both failed");
  }

  sol.status = Status::Optimal;
  sol.u_star = res.x.head(n);
  sol.objective = 0.5 * sol.u_star.dot(problem.H * sol.u_star) + problem.c.dot(sol.u_star);
  Vec residual = problem.H * sol.u_star + problem.c;
  std::vector<std::pair<int, double>> active;
  for (std::size_t i = 0; i < res.working.size(); ++i) {
    const int row = res.working[i];
    const double lam = res.lambda(static_cast<Eigen::Index>(i));
    residual += lam * Vec(s.rows.row(row).transpose());
    active.emplace_back(s.origin[static_cast<std::size_t>(row)], lam);
  }
  std::sort(active.begin(), active.end());
  for (const auto& [idx, lam] : active) {
    sol.active_set.push_back(idx);
    sol.multipliers.push_back(lam);
  }
  sol.stationarity_residual = residual.cwiseAbs().maxCoeff();
  double viol = 0.0;
  for (Eigen::Index j = 0; j < s.rows.rows(); ++j)
    viol = std::max(viol, s.rows.row(j).dot(WVec(res.x)) - s.rhs(j));
  sol.max_violation = viol;
  return sol;
}

std::string describe_constraint(const QpProblem& problem, int index) {
  const int m = problem.num_ineq();
  const int n = problem.num_vars();
  std::ostringstream os;
  if (index < m) {
    os << "row " << index;
  } else if (index < m + n) {
    os << "lb[" << index - m << "]";
  } else {
    os << "ub[" << index - m - n << "]";
  }
  return os.str();
}

}  // namespace stochras::qp
