#pragma once

#include <functional>
#include <vector>

#include "stochras/certificates.hpp"
#include "stochras/simulator.hpp"

namespace stochras {

/// Plant whose drift is affine in a scheduling parameter mu:
///   f(x; mu) = f(x; mu_ref) + (mu - mu_ref) * df/dmu(x).
struct SynthesisPlant {
  ModelFamily model_at;
  /// df/dmu; empty when the parameter is not a control authority.
  std::function<Vec(const Vec&)> drift_param_sensitivity;
};

struct SynthesisConfig {
  InputBox input_box{vec({-0.05}), vec({0.05})};
  double mu_lo = 0.5;
  double mu_hi = 1.0;
  double mu_rate = 0.01;  ///< |mu(t + tau) - mu(t)| <= mu_rate * tau
  double mu0_lo = 0.62;
  double mu0_hi = 0.66;
  double clf_slack_weight = 100.0;
  double u_weight = 1.0;
  double mu_weight = 10.0;
  bool cbf_hard = true;

  void validate() const;
};

/// Linear constraint row over the decision variables:
///   coeff_u . v + coeff_mu * (mu_next - mu_cur) + constant  <=  (slack or 0).
struct ConstraintRow {
  Vec coeff_u;
  double coeff_mu = 0.0;
  double constant = 0.0;
};

/// Raised when a barrier is asked to certify from a state with h <= 0.
class SafetyViolation : public Error {
 public:
  using Error::Error;
};

/// Worst-case CLF row: grad V . b(x) v + grad V . df/dmu (mu_next - mu_cur)
///   + [sup_d L_d V(x) + a3(|x|_A)] <= s, with the drift at mu_cur.
ConstraintRow clf_row(const SystemModel& model_at_mu, const Vec* drift_dmu, const Vec& x,
                      const ScalarField2& V, const ClassK& alpha3, const Region& target);

/// Worst-case reciprocal CBF row with a~3(h_i(x)). Throws SafetyViolation when
/// h_i(x) <= 1e-12 (on or outside the boundary up to rounding).
ConstraintRow cbf_row(const SystemModel& model_at_mu, const Vec* drift_dmu, const Vec& x,
                      const BarrierEntry& barrier);

struct SynthesisResult {
  bool feasible = false;
  Vec v;
  double mu_next = 0.0;
  double slack = 0.0;
  double objective = 0.0;
  std::vector<int> active_set;
};

/// Min-norm QP over (v, mu_next, s):
///   min u_w |v|^2 + mu_w (mu_next - mu_cur)^2 + s_w s^2
///   s.t. CLF row <= s, CBF rows <= 0, v in box, mu_next in range and rate
///   window, s >= 0.
/// Returns feasible = false iff the QP is infeasible.
SynthesisResult synthesize_step(const SynthesisPlant& plant, const CertificateSet& certs,
                                const SynthesisConfig& cfg, const Vec& x, double mu_cur,
                                double dt);

/// Per-step diagnostics sink (t, result).
using SynthesisTrace = std::function<void(double, const SynthesisResult&)>;

/// Policy that calls synthesize_step at every step; SafetyViolation and
/// infeasible QPs become PolicyDecision::make_infeasible().
Policy make_synthesis_policy(SynthesisPlant plant, CertificateSet certs, SynthesisConfig cfg,
                             double dt, SynthesisTrace trace = {});

}  // namespace stochras
