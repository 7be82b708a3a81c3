#pragma once

#include <vector>

#include "stochras/certificates.hpp"
#include "stochras/ras_spec.hpp"
#include "stochras/sde_core.hpp"
#include "stochras/synthesis.hpp"

namespace stochras::mg {

/// Reduced Moore-Greitzer compressor parameters.
///
/// The default characteristic offset is a = 1.67 * iota (= 0.3006). With this
/// value the target centre (0.4519, 0.6513) is the equilibrium at mu ~= 0.56,
/// the reference initial condition (0.5343, 0.6553) is an equilibrium, and the
/// mu = 0.63 / 0.59 stable / oscillating split holds. low_offset() gives the
/// a = 0.67 * iota variant, whose equilibria lie outside the safe region.
struct MgParams {
  double l_c = 8.0;
  double iota = 0.18;
  double theta = 0.25;
  double a = 1.67 * 0.18;
  double eps = 0.08;   ///< multiplicative noise gain
  double delta = 0.01; ///< disturbance bound used by the certificates

  static MgParams low_offset();
  void validate() const;
};

/// Compressor characteristic a + iota (1 + 1.5 w - 0.5 w^3), w = phi / theta - 1.
double psi_c(double phi, const MgParams& params);
double psi_c_derivative(double phi, const MgParams& params);

struct Equilibrium {
  double phi = 0.0;
  double psi = 0.0;
  std::vector<double> other_phi_roots;  ///< remaining roots in (0, 1], ascending

  Vec state() const { return vec({phi, psi}); }
};

/// Root of psi_c(phi) = psi, phi = mu sqrt(psi) on the largest-phi branch in
/// (0, 1]. Newton on phi (psi = (phi / mu)^2) with bisection safeguard.
Equilibrium equilibrium(double mu, const MgParams& params = {});

/// mu at which the equilibrium has mass flow phi: phi / sqrt(psi_c(phi)).
double mu_for_phi(double phi, const MgParams& params = {});

struct ModelOptions {
  bool diffusion = true;  ///< false gives g == 0 (deterministic flow)
};

/// State (phi, psi), one control entering the phi equation, two independent
/// Wiener coordinates with g = eps diag(phi - phi_e(mu), psi - psi_e(mu)).
/// Evaluating at psi <= 0 throws DomainError.
SystemModel mg_model(const MgParams& params, double mu, const ModelOptions& opts = {});

/// df/dmu = (0, -sqrt(psi) / (16 l_c)).
Vec drift_mu_sensitivity(const MgParams& params, const Vec& x);

/// Problem geometry.
struct MgSpec {
  Vec gamma = vec({0.4519, 0.6513});
  double gamma_radius = 0.013;
  Vec h1_center = vec({0.49, 0.64});
  double h1_radius = 0.055;
  Vec h2_center = vec({0.50, 0.65});
  double h2_radius = 0.003;
  Vec alternate_initial_state = vec({0.5343, 0.6553});
  double alpha3_coeff = 0.1;
  double workspace_radius = 5.0;
  double stay_tolerance_fraction = 0.5;  ///< of gamma_radius
  double horizon = 50.0;
};

/// h1 = h1_radius - |x - h1_center| (inside the big disc),
/// h2 = |x - h2_center| - h2_radius (outside the small disc).
ScalarField2 h1_field(const MgSpec& spec = {});
ScalarField2 h2_field(const MgSpec& spec = {});
/// -log(h / (1 + h)) with analytic gradient and Hessian.
ScalarField2 reciprocal_barrier(const ScalarField2& h);
/// (l_c / 2)(phi - g1)^2 + 8 l_c (psi - g2)^2.
ScalarField2 slf(const MgParams& params, const MgSpec& spec = {});

struct Problem1Bundle {
  MgParams params;
  MgSpec geometry;
  double mu0 = 0.63;
  double mu_target = 0.0;  ///< mu whose equilibrium has phi = gamma_1
  SynthesisPlant plant;
  CertificateSet certs;
  RasSpec spec;
  SynthesisConfig synthesis;
  Vec x0;
  ModelOptions model_options;
};

/// Full case-study bundle. The safe set is {h1 >= 0} and {h2 >= 0}, U its
/// complement; X0 = {equilibrium(mu0)}. Requires mu0 in [0.62, 0.66].
Problem1Bundle problem1_bundle(double mu0 = 0.63, const MgParams& params = {},
                               const MgSpec& geometry = {}, const ModelOptions& opts = {});

}  // namespace stochras::mg
