#include "stochras/synthesis.hpp"

#include <cmath>
#include <sstream>

namespace stochras {

void SynthesisConfig::validate() const {
  if (input_box.lo.size() != input_box.hi.size()) throw ConfigError("input box shape mismatch");
  for (Eigen::Index i = 0; i < input_box.lo.size(); ++i)
    if (!(input_box.lo(i) <= input_box.hi(i))) throw ConfigError("input box is empty");
  if (!(mu_lo <= mu_hi)) throw ConfigError("mu range is empty");
  if (!(mu0_lo <= mu0_hi)) throw ConfigError("mu0 range is empty");
  if (!(mu_rate >= 0.0)) throw ConfigError("mu rate must be >= 0");
  if (!(clf_slack_weight > 0.0 && u_weight > 0.0 && mu_weight > 0.0))
    throw ConfigError("synthesis weights must be positive");
}

namespace {

constexpr double kBarrierBoundaryTol = 1e-12;

std::string format_state(const Vec& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

ConstraintRow build_row(const SystemModel& model, const Vec* drift_dmu, const Vec& x,
                        const ScalarField2& field, double extra) {
  ConstraintRow row;
  const Vec grad = field.gradient(x);
  row.coeff_u = model.b(x).transpose() * grad;
  row.coeff_mu = drift_dmu != nullptr ? grad.dot(*drift_dmu) : 0.0;
  row.constant = worst_case_generator(model, x, field) + extra;
  if (!row.coeff_u.allFinite() || !std::isfinite(row.coeff_mu) || !std::isfinite(row.constant))
    throw EvaluationError("non-finite synthesis row at state " + format_state(x));
  return row;
}

}  // namespace

ConstraintRow clf_row(const SystemModel& model_at_mu, const Vec* drift_dmu, const Vec& x,
                      const ScalarField2& V, const ClassK& alpha3, const Region& target) {
  return build_row(model_at_mu, drift_dmu, x, V, alpha3(target.distance(x)));
}

ConstraintRow cbf_row(const SystemModel& model_at_mu, const Vec* drift_dmu, const Vec& x,
                      const BarrierEntry& barrier) {
  // h within rounding of zero counts as the boundary: B and its gradient are
  // meaningless there anyway.
  const double h = barrier.h.value(x);
  if (!(h > kBarrierBoundaryTol))
    throw SafetyViolation("barrier " + barrier.name + " cannot certify from state " +
                          format_state(x) + " (h <= 0)");
  return build_row(model_at_mu, drift_dmu, x, barrier.B, -barrier.atilde3(h));
}

SynthesisResult synthesize_step(const SynthesisPlant& plant, const CertificateSet& certs,
                                const SynthesisConfig& cfg, const Vec& x, double mu_cur,
                                double dt) {
  const SystemModel model = plant.model_at(mu_cur);
  const int p = model.p;
  if (cfg.input_box.lo.size() != p) throw ConfigError("input box dimension differs from p");
  Vec dmu_storage;
  const Vec* dmu = nullptr;
  if (plant.drift_param_sensitivity) {
    dmu_storage = plant.drift_param_sensitivity(x);
    dmu = &dmu_storage;
  }

  // Decision vector z = (v, dmu, s) with dmu = mu_next - mu_cur.
  const int nz = p + 2;
  Mat H = Mat::Zero(nz, nz);
  H.diagonal().head(p).setConstant(2.0 * cfg.u_weight);
  H(p, p) = 2.0 * cfg.mu_weight;
  H(p + 1, p + 1) = 2.0 * cfg.clf_slack_weight;
  qp::QpProblem prob = qp::QpProblem::unconstrained(H, Vec::Zero(nz));

  auto add = [&](const ConstraintRow& row, bool soft) {
    Vec a(nz);
    a.head(p) = row.coeff_u;
    a(p) = row.coeff_mu;
    a(p + 1) = soft ? -1.0 : 0.0;
    prob.add_row(a, -row.constant);
  };
  add(clf_row(model, dmu, x, certs.V, certs.alpha3, certs.target_A), true);
  for (const BarrierEntry& b : certs.barriers) add(cbf_row(model, dmu, x, b), !cfg.cbf_hard);

  const double step = cfg.mu_rate * dt;
  double dmu_lo = 0.0;
  double dmu_hi = 0.0;
  if (dmu != nullptr) {
    dmu_lo = std::max(-step, cfg.mu_lo - mu_cur);
    dmu_hi = std::min(step, cfg.mu_hi - mu_cur);
    if (dmu_lo > dmu_hi) dmu_lo = dmu_hi = 0.0;
  }
  prob.lb.head(p) = cfg.input_box.lo;
  prob.ub.head(p) = cfg.input_box.hi;
  prob.lb(p) = dmu_lo;
  prob.ub(p) = dmu_hi;
  prob.lb(p + 1) = 0.0;

  qp::QpSolution sol;
  try {
    sol = qp::solve(prob);
  } catch (const Error& e) {
    throw NumericalError(std::string(e.what()) + " at state " + format_state(x));
  }
  SynthesisResult out;
  if (sol.status == qp::Status::Infeasible) return out;

  const Vec& z = sol.u_star;
  constexpr double kTol = 1e-8;
  for (int i = 0; i < p; ++i) {
    if (z(i) < cfg.input_box.lo(i) - kTol || z(i) > cfg.input_box.hi(i) + kTol)
      throw NumericalError("synthesized input leaves the input box at state " + format_state(x));
  }
  if (z(p) < dmu_lo - kTol || z(p) > dmu_hi + kTol)
    throw NumericalError("synthesized mu step leaves its window at state " + format_state(x));

  out.feasible = true;
  out.v = z.head(p).cwiseMax(cfg.input_box.lo).cwiseMin(cfg.input_box.hi);
  out.mu_next = mu_cur + std::clamp(z(p), dmu_lo, dmu_hi);
  if (dmu != nullptr)
    out.mu_next = std::clamp(out.mu_next, std::max(cfg.mu_lo, mu_cur - step),
                             std::min(cfg.mu_hi, mu_cur + step));
  else
    out.mu_next = mu_cur;
  out.slack = std::max(0.0, z(p + 1));
  out.objective = sol.objective;
  out.active_set = sol.active_set;
  return out;
}

Policy make_synthesis_policy(SynthesisPlant plant, CertificateSet certs, SynthesisConfig cfg,
                             double dt, SynthesisTrace trace) {
  cfg.validate();
  return [plant = std::move(plant), certs = std::move(certs), cfg, dt,
          trace = std::move(trace)](const Vec& x, double t, double mu) -> PolicyDecision {
    SynthesisResult res;
    try {
      res = synthesize_step(plant, certs, cfg, x, mu, dt);
    } catch (const SafetyViolation&) {
      res.feasible = false;
    }
    if (trace) trace(t, res);
    if (!res.feasible) return PolicyDecision::make_infeasible();
    return PolicyDecision{res.v, res.mu_next};
  };
}

}  // namespace stochras
