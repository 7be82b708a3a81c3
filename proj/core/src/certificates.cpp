#include "stochras/certificates.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stochras {

void CertificateSet::validate() const {
  if (!G.is_ball()) throw ConfigError("G must be a ball around the target");
  const double r = G.radius();
  if (!(r > 0.0) || r > R_outer) throw ConfigError("G radius must satisfy 0 < r <= R_outer");
}

std::vector<Vec> GridSpec::points() const {
  std::vector<Vec> pts;
  if (const auto* box = std::get_if<Box>(&shape)) {
    const auto n = box->lo.size();
    if (n == 0 || box->hi.size() != n || static_cast<Eigen::Index>(box->counts.size()) != n)
      throw ConfigError("box grid needs matching lo/hi/counts");
    std::size_t total = 1;
    for (int c : box->counts) {
      if (c <= 0) throw ConfigError("empty grid");
      total *= static_cast<std::size_t>(c);
    }
    pts.reserve(total);
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t k = 0; k < total; ++k) {
      Vec x(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const int c = box->counts[static_cast<std::size_t>(i)];
        const double frac = c == 1 ? 0.0 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (c - 1);
        x(i) = box->lo(i) + frac * (box->hi(i) - box->lo(i));
      }
      pts.push_back(x);
      for (Eigen::Index i = n - 1; i >= 0; --i) {
        auto& j = idx[static_cast<std::size_t>(i)];
        if (++j < box->counts[static_cast<std::size_t>(i)]) break;
        j = 0;
      }
    }
    return pts;
  }
  const auto& an = std::get<Annulus>(shape);
  if (an.radial <= 0 || an.angular <= 0) throw ConfigError("empty grid");
  if (!(an.r_inner >= 0.0) || an.r_outer < an.r_inner)
    throw ConfigError("annulus needs 0 <= r_inner <= r_outer");
  const auto n = an.center.size();
  if (n != 1 && n != 2) throw CapabilityError("annulus grids are only defined for n = 1 or n = 2");
  for (int i = 0; i < an.radial; ++i) {
    const double r = an.radial == 1
                         ? an.r_inner
                         : an.r_inner + (an.r_outer - an.r_inner) * static_cast<double>(i) /
                                            (an.radial - 1);
    if (n == 1) {
      pts.push_back(an.center + vec({-r}));
      pts.push_back(an.center + vec({r}));
      continue;
    }
    for (int j = 0; j < an.angular; ++j) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(j) / an.angular;
      pts.push_back(an.center + vec({r * std::cos(th), r * std::sin(th)}));
    }
  }
  return pts;
}

double GridSpec::resolution() const {
  if (const auto* box = std::get_if<Box>(&shape)) {
    double res = 0.0;
    for (Eigen::Index i = 0; i < box->lo.size(); ++i) {
      const int c = box->counts[static_cast<std::size_t>(i)];
      const double span = box->hi(i) - box->lo(i);
      res = std::max(res, c > 1 ? span / (c - 1) : span);
    }
    return res;
  }
  const auto& an = std::get<Annulus>(shape);
  double res = an.radial > 1 ? (an.r_outer - an.r_inner) / (an.radial - 1) : 0.0;
  if (an.center.size() == 2) res = std::max(res, 2.0 * std::numbers::pi * an.r_outer / an.angular);
  return res;
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return a.size() < b.size();
}

// Running minimum with a deterministic tie-break on the point.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  Vec point;
  std::string condition;

  void offer(double m, const Vec& x, const char* cond) {
    if (m < margin || (m == margin && lex_less(x, point))) {
      margin = m;
      point = x;
      condition = cond;
    }
  }
};

void finish(CheckReport& rep, const Worst& worst, const GridSpec& grid, const CheckOptions& opts,
            Eigen::Index n) {
  rep.worst_margin = worst.margin;
  rep.worst_point = worst.point;
  rep.worst_condition = worst.condition;
  rep.grid_resolution = grid.resolution();
  rep.required_margin = -opts.tolerance;
  if (opts.lipschitz)
    rep.required_margin = *opts.lipschitz * rep.grid_resolution * std::sqrt(static_cast<double>(n));
  rep.passed = rep.samples_checked > 0 && rep.worst_margin >= rep.required_margin;
}

std::string format_point(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

}  // namespace

double evaluate_slf_slack(const SystemModel& model, const CertificateSet& certs,
                          const std::string& condition, const Vec& x) {
  const double s = certs.target_A.distance(x);
  if (condition == "lower_sandwich") return certs.V.value(x) - certs.alpha1(s);
  if (condition == "upper_sandwich") return certs.alpha2(s) - certs.V.value(x);
  if (condition == "generator") return -certs.alpha3(s) - worst_case_generator(model, x, certs.V);
  throw ConfigError("unknown SLF condition: " + condition);
}

CheckReport check_slf(const SystemModel& model, const CertificateSet& certs, const GridSpec& grid,
                      const CheckOptions& opts) {
  model.validate();
  const std::vector<Vec> pts = grid.points();
  if (pts.empty()) throw ConfigError("empty grid");
  CheckReport rep;
  rep.name = "slf";
  Worst worst;
  for (const Vec& x : pts) {
    const double s = certs.target_A.distance(x);
    if (s == 0.0) {
      ++rep.samples_skipped;
      continue;
    }
    const double v = certs.V.value(x);
    worst.offer(v - certs.alpha1(s), x, "lower_sandwich");
    worst.offer(certs.alpha2(s) - v, x, "upper_sandwich");
    worst.offer(-certs.alpha3(s) - worst_case_generator(model, x, certs.V), x, "generator");
    ++rep.samples_checked;
  }
  if (rep.samples_checked == 0) throw ConfigError("empty grid: no points off the target set");
  finish(rep, worst, grid, opts, model.n);
  return rep;
}

CheckReport check_reciprocal_barrier(const SystemModel& model, const CertificateSet& certs,
                                     const BarrierEntry& barrier, const GridSpec& grid,
                                     const CheckOptions& opts) {
  model.validate();
  const std::vector<Vec> pts = grid.points();
  if (pts.empty()) throw ConfigError("empty grid");
  CheckReport rep;
  rep.name = "barrier:" + barrier.name;
  Worst worst;
  std::vector<Vec> mismatched;
  const bool sandwich = barrier.atilde1.has_value() && barrier.atilde2.has_value();
  for (const Vec& x : pts) {
    if (!certs.G.contains(x)) {
      ++rep.samples_skipped;
      continue;
    }
    const double hx = barrier.h.value(x);
    if (!(hx > 0.0)) {
      mismatched.push_back(x);
      continue;
    }
    const double arg =
        barrier.anchor == BarrierEntry::Anchor::Target ? certs.target_A.distance(x) : hx;
    const double bx = barrier.B.value(x);
    worst.offer(barrier.atilde3(arg) - worst_case_generator(model, x, barrier.B), x, "generator");
    if (sandwich && arg > 0.0) {
      worst.offer(bx - 1.0 / (*barrier.atilde1)(arg), x, "lower_sandwich");
      worst.offer(1.0 / (*barrier.atilde2)(arg) - bx, x, "upper_sandwich");
    } else if (!sandwich) {
      worst.offer(bx, x, "positivity");
    }
    ++rep.samples_checked;
  }
  if (!mismatched.empty()) {
    std::ostringstream os;
    os << "region mismatch for barrier " << barrier.name << ": h <= 0 at " << mismatched.size()
       << " grid point(s) inside G:";
    for (std::size_t i = 0; i < std::min<std::size_t>(mismatched.size(), 10); ++i)
      os << " " << format_point(mismatched[i]);
    throw PreconditionError(os.str());
  }
  if (rep.samples_checked == 0) throw ConfigError("empty grid: no points inside G");
  finish(rep, worst, grid, opts, model.n);
  return rep;
}

double probability_bound(const CertificateSet& certs, const Region& X0,
                         std::span<const Vec> x0_samples) {
  certs.validate();
  std::vector<Vec> samples(x0_samples.begin(), x0_samples.end());
  if (X0.is_ball()) {
    const Vec& c = X0.center();
    const double r = X0.radius();
    samples.push_back(c);
    if (r > 0.0) {
      const auto n = c.size();
      if (n == 2) {
        for (int j = 0; j < 256; ++j) {
          const double th = 2.0 * std::numbers::pi * j / 256.0;
          samples.push_back(c + vec({r * std::cos(th), r * std::sin(th)}));
        }
      } else {
        for (Eigen::Index i = 0; i < n; ++i) {
          Vec e = Vec::Zero(n);
          e(i) = r;
          samples.push_back(c + e);
          samples.push_back(c - e);
        }
      }
    }
  }
  if (samples.empty()) throw PreconditionError("no initial-set samples");
  double sup_v = 0.0;
  for (const Vec& x : samples) {
    if (!certs.G.contains(x))
      throw PreconditionError("initial-set sample " + format_point(x) + " lies outside G");
    sup_v = std::max(sup_v, certs.V.value(x));
  }
  const double bound = 1.0 - sup_v / certs.alpha1(certs.G.radius());
  return std::clamp(bound, 0.0, 1.0);
}

CheckReport check_control_feasibility(const SystemModel& model, const CertificateSet& certs,
                                      const GridSpec& grid, const InputBox& box,
                                      const CheckOptions& opts) {
  model.validate();
  if (box.lo.size() != model.p || box.hi.size() != model.p)
    throw ConfigError("input box dimension differs from the control dimension");
  for (int i = 0; i < model.p; ++i)
    if (!(box.lo(i) <= box.hi(i))) throw ConfigError("input box is empty");
  const std::vector<Vec> pts = grid.points();
  if (pts.empty()) throw ConfigError("empty grid");
  CheckReport rep;
  rep.name = "control_feasibility";
  Worst worst;
  for (const Vec& x : pts) {
    const double s = certs.target_A.distance(x);
    const double c0 = worst_case_generator(model, x, certs.V) + certs.alpha3(s);
    double minimum = c0;
    Vec a;
    if (model.p > 0) {
      a = model.b(x).transpose() * certs.V.gradient(x);
      for (int i = 0; i < model.p; ++i) minimum += std::min(a(i) * box.lo(i), a(i) * box.hi(i));

      qp::QpProblem prob = qp::QpProblem::unconstrained(Mat::Identity(model.p, model.p),
                                                        Vec::Zero(model.p));
      prob.add_row(a, -c0);
      prob.lb = box.lo;
      prob.ub = box.hi;
      const qp::QpSolution sol = qp::solve(prob);
      const double scale = 1e-9 * (1.0 + std::abs(c0) + a.cwiseAbs().sum());
      const bool qp_feasible = sol.status == qp::Status::Optimal;
      if ((qp_feasible && minimum > scale) || (!qp_feasible && minimum < -scale)) {
        throw NumericalError("QP feasibility disagrees with the box minimum at " + format_point(x));
      }
    }
    worst.offer(-minimum, x, "controlled_generator");
    ++rep.samples_checked;
  }
  finish(rep, worst, grid, opts, model.n);
  return rep;
}

}  // namespace stochras
