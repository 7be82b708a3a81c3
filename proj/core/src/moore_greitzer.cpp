#include "stochras/moore_greitzer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stochras::mg {

MgParams MgParams::low_offset() {
  MgParams p;
  p.a = 0.67 * p.iota;
  return p;
}

void MgParams::validate() const {
  for (double v : {l_c, iota, theta, a, eps, delta})
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("compressor parameters must be positive");
}

double psi_c(double phi, const MgParams& params) {
  const double w = phi / params.theta - 1.0;
  return params.a + params.iota * (1.0 + 1.5 * w - 0.5 * w * w * w);
}

double psi_c_derivative(double phi, const MgParams& params) {
  const double w = phi / params.theta - 1.0;
  return params.iota / params.theta * 1.5 * (1.0 - w * w);
}

namespace {

// F(phi) = psi_c(phi) - (phi / mu)^2; its roots are the equilibrium mass flows.
double residual(double phi, double mu, const MgParams& p) {
  const double q = phi / mu;
  return psi_c(phi, p) - q * q;
}

double residual_derivative(double phi, double mu, const MgParams& p) {
  return psi_c_derivative(phi, p) - 2.0 * phi / (mu * mu);
}

// Safeguarded Newton on a bracket where F changes sign.
double refine_root(double lo, double hi, double mu, const MgParams& p) {
  double flo = residual(lo, mu, p);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fx = residual(x, mu, p);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double dfx = residual_derivative(x, mu, p);
    double next = dfx != 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-17 + 4e-16 * std::abs(x) || hi - lo <= 4e-16 * std::abs(x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace

Equilibrium equilibrium(double mu, const MgParams& params) {
  if (!(mu >= 0.5 && mu <= 1.0))
    throw PreconditionError("equilibrium needs mu in [0.5, 1]");
  // F' = phi * (3k/theta - 1.5 k phi / theta^2 - 2/mu^2) with k = iota/theta,
  // so F is monotone between 0, its interior critical point, and 1.
  const double k = params.iota / params.theta;
  const double crit =
      (3.0 * k / params.theta - 2.0 / (mu * mu)) * params.theta * params.theta / (1.5 * k);
  std::vector<double> knots{0.0};
  if (crit > 0.0 && crit < 1.0) knots.push_back(crit);
  knots.push_back(1.0);

  std::vector<double> roots;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double lo = knots[i];
    const double hi = knots[i + 1];
    const double flo = residual(lo, mu, params);
    const double fhi = residual(hi, mu, params);
    if (fhi == 0.0) {
      roots.push_back(hi);
    } else if (lo > 0.0 && flo == 0.0) {
      roots.push_back(lo);
    } else if ((flo < 0.0) != (fhi < 0.0)) {
      roots.push_back(refine_root(lo, hi, mu, params));
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  std::erase_if(roots, [](double r) { return !(r > 0.0 && r <= 1.0); });
  if (roots.empty()) {
    std::ostringstream os;
    os.precision(17);
    os << "no equilibrium in (0, 1] for mu = " << mu << "; F(0+) = " << residual(1e-12, mu, params)
       << ", F(1) = " << residual(1.0, mu, params);
    throw NumericalError(os.str());
  }
  Equilibrium eq;
  eq.phi = roots.back();
  eq.psi = (eq.phi / mu) * (eq.phi / mu);
  roots.pop_back();
  eq.other_phi_roots = roots;
  if (std::abs(psi_c(eq.phi, params) - eq.psi) > 1e-12 ||
      std::abs(eq.phi - mu * std::sqrt(eq.psi)) > 1e-12)
    throw NumericalError("equilibrium residual above 1e-12");
  return eq;
}

double mu_for_phi(double phi, const MgParams& params) {
  const double psi = psi_c(phi, params);
  if (!(psi > 0.0)) throw DomainError("psi_c(phi) <= 0");
  return phi / std::sqrt(psi);
}

SystemModel mg_model(const MgParams& params, double mu, const ModelOptions& opts) {
  params.validate();
  SystemModel m;
  m.n = 2;
  m.m = 2;
  m.p = 1;
  m.delta = params.delta;
  m.drift = [params, mu](const Vec& x) {
    if (!(x(1) > 0.0)) throw DomainError("pressure rise psi <= 0 outside the physical workspace");
    return vec({(psi_c(x(0), params) - x(1)) / params.l_c,
                (x(0) - mu * std::sqrt(x(1))) / (16.0 * params.l_c)});
  };
  m.control_matrix = [](const Vec&) {
    Mat b(2, 1);
    b << 1.0, 0.0;
    return b;
  };
  if (opts.diffusion) {
    const Equilibrium eq = equilibrium(mu, params);
    m.diffusion = [eps = params.eps, phi_e = eq.phi, psi_e = eq.psi](const Vec& x) {
      Mat g = Mat::Zero(2, 2);
      g(0, 0) = eps * (x(0) - phi_e);
      g(1, 1) = eps * (x(1) - psi_e);
      return g;
    };
  } else {
    m.diffusion = [](const Vec&) { return Mat(Mat::Zero(2, 2)); };
  }
  return m;
}

Vec drift_mu_sensitivity(const MgParams& params, const Vec& x) {
  if (!(x(1) > 0.0)) throw DomainError("pressure rise psi <= 0 outside the physical workspace");
  return vec({0.0, -std::sqrt(x(1)) / (16.0 * params.l_c)});
}

namespace {

// sign * (|x - c| - r): +1 gives "outside the disc", -1 gives "inside".
ScalarField2 disc_field(Vec center, double radius, double sign) {
  ScalarField2 f;
  f.value = [=](const Vec& x) { return sign * ((x - center).norm() - radius); };
  f.gradient = [=](const Vec& x) {
    const Vec e = x - center;
    const double rho = e.norm();
    if (rho == 0.0) return Vec(Vec::Zero(e.size()));
    return Vec(sign * e / rho);
  };
  f.hessian = [=](const Vec& x) {
    const Vec e = x - center;
    const double rho = e.norm();
    const auto n = e.size();
    if (rho == 0.0) return Mat(Mat::Zero(n, n));
    const Vec u = e / rho;
    return Mat(sign * (Mat::Identity(n, n) - u * u.transpose()) / rho);
  };
  return f;
}

}  // namespace

ScalarField2 h1_field(const MgSpec& spec) { return disc_field(spec.h1_center, spec.h1_radius, -1.0); }

ScalarField2 h2_field(const MgSpec& spec) { return disc_field(spec.h2_center, spec.h2_radius, 1.0); }

ScalarField2 reciprocal_barrier(const ScalarField2& h) {
  ScalarField2 b;
  b.value = [h](const Vec& x) {
    const double hx = h.value(x);
    if (!(hx > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log1p(1.0 / hx);
  };
  // dB/dh = -1 / (h (1 + h)), d2B/dh2 = (1 + 2h) / (h^2 (1 + h)^2)
  b.gradient = [h](const Vec& x) {
    const double hx = h.value(x);
    return Vec(-h.gradient(x) / (hx * (1.0 + hx)));
  };
  b.hessian = [h](const Vec& x) {
    const double hx = h.value(x);
    const Vec g = h.gradient(x);
    const double d1 = -1.0 / (hx * (1.0 + hx));
    const double d2 = (1.0 + 2.0 * hx) / (hx * hx * (1.0 + hx) * (1.0 + hx));
    return Mat(d2 * g * g.transpose() + d1 * h.hessian(x));
  };
  return b;
}

ScalarField2 slf(const MgParams& params, const MgSpec& spec) {
  Mat Q = Mat::Zero(2, 2);
  Q(0, 0) = params.l_c / 2.0;
  Q(1, 1) = 8.0 * params.l_c;
  return ScalarField2::quadratic(Q, spec.gamma);
}

Problem1Bundle problem1_bundle(double mu0, const MgParams& params, const MgSpec& geometry,
                               const ModelOptions& opts) {
  if (!(mu0 >= 0.62 && mu0 <= 0.66)) throw PreconditionError("mu0 must lie in [0.62, 0.66]");
  params.validate();
  Problem1Bundle b;
  b.params = params;
  b.geometry = geometry;
  b.mu0 = mu0;
  b.model_options = opts;
  b.mu_target = mu_for_phi(geometry.gamma(0), params);
  b.x0 = equilibrium(mu0, params).state();

  b.plant.model_at = [params, opts](double mu) { return mg_model(params, mu, opts); };
  b.plant.drift_param_sensitivity = [params](const Vec& x) { return drift_mu_sensitivity(params, x); };

  const ScalarField2 h1 = h1_field(geometry);
  const ScalarField2 h2 = h2_field(geometry);
  b.certs.V = slf(params, geometry);
  b.certs.target_A = Region::point(geometry.gamma);
  b.certs.alpha1 = ClassK::power(params.l_c / 2.0, 2.0);
  b.certs.alpha2 = ClassK::power(8.0 * params.l_c, 2.0);
  b.certs.alpha3 = ClassK::linear(geometry.alpha3_coeff);
  for (auto [name, h] : {std::pair{"B1", h1}, std::pair{"B2", h2}}) {
    BarrierEntry e;
    e.name = name;
    e.h = h;
    e.B = reciprocal_barrier(h);
    e.atilde3 = ClassK::linear(geometry.alpha3_coeff);
    e.anchor = BarrierEntry::Anchor::Boundary;
    b.certs.barriers.push_back(std::move(e));
  }
  b.certs.G = Region::ball(geometry.gamma, geometry.gamma_radius);
  b.certs.R_outer = std::min(h1.value(geometry.gamma), h2.value(geometry.gamma));

  b.spec.X0 = Region::point(b.x0);
  b.spec.Gamma = Region::ball(geometry.gamma, geometry.gamma_radius);
  b.spec.Unsafe = Region::complement(Region::intersection(
      {Region::level_set(h1.value, "h1"), Region::level_set(h2.value, "h2")}));
  b.spec.workspace_center = b.x0;
  b.spec.workspace_radius = geometry.workspace_radius;
  b.spec.required_p = 1.0;
  b.spec.stay_tolerance = geometry.stay_tolerance_fraction * geometry.gamma_radius;
  b.spec.horizon = geometry.horizon;
  return b;
}

}  // namespace stochras::mg
