#include <gtest/gtest.h>

#include <cmath>

#include "stochras/moore_greitzer.hpp"
#include "stochras/rng.hpp"
#include "stochras/synthesis.hpp"

using namespace stochras;

namespace {

ScalarField2 linear_field(double slope) {
  ScalarField2 f;
  f.value = [slope](const Vec& x) { return slope * x(0); };
  f.gradient = [slope](const Vec&) { return vec({slope}); };
  f.hessian = [](const Vec&) { return Mat::Zero(1, 1); };
  return f;
}

SystemModel integrator_1d(double delta) {
  SystemModel m;
  m.n = 1;
  m.m = 1;
  m.p = 1;
  m.drift = [](const Vec&) { return vec({0.0}); };
  m.control_matrix = [](const Vec&) { return Mat::Constant(1, 1, 1.0); };
  m.diffusion = [](const Vec&) { return Mat::Zero(1, 1); };
  m.delta = delta;
  return m;
}

SynthesisConfig wide_box_config() {
  SynthesisConfig cfg;
  cfg.input_box = InputBox{vec({-5.0}), vec({5.0})};
  return cfg;
}

}  // namespace

TEST(ClfRow, CoefficientOfVIsPhiPartial) {
  const auto b = mg::problem1_bundle();
  const Vec x = vec({0.5, 0.65});
  const SystemModel model = b.plant.model_at(0.63);
  const Vec dmu = b.plant.drift_param_sensitivity(x);
  const ConstraintRow row = clf_row(model, &dmu, x, b.certs.V, b.certs.alpha3, b.certs.target_A);
  ASSERT_EQ(row.coeff_u.size(), 1);
  EXPECT_NEAR(row.coeff_u(0), 0.3848, 1e-12);
  // dV/dpsi * df2/dmu = 128 (0.65 - 0.6513) * (-sqrt(0.65) / 128)
  EXPECT_NEAR(row.coeff_mu, 0.0013 * std::sqrt(0.65), 1e-14);
}

TEST(ClfRow, NoDecisionVariablesReducesToConstant) {
  SystemModel m = integrator_1d(0.0);
  m.p = 0;
  m.control_matrix = nullptr;
  m.drift = [](const Vec& x) { return Vec(-x); };
  const auto V = ScalarField2::quadratic(Mat::Identity(1, 1), Vec::Zero(1));
  const ConstraintRow row = clf_row(m, nullptr, vec({0.5}), V, ClassK::linear(0.1),
                                    Region::point(Vec::Zero(1)));
  EXPECT_EQ(row.coeff_u.size(), 0);
  EXPECT_EQ(row.coeff_mu, 0.0);
  EXPECT_NEAR(row.constant, -0.5 + 0.05, 1e-15);
}

namespace {

// Geometry whose target centre is exactly the equilibrium at mu = 0.56.
mg::Problem1Bundle bundle_with_exact_target() {
  mg::MgSpec g;
  g.gamma = mg::equilibrium(0.56).state();
  return mg::problem1_bundle(0.63, mg::MgParams{}, g);
}

}  // namespace

TEST(ClfRow, VanishesAtTargetEquilibrium) {
  const auto b = bundle_with_exact_target();
  const Vec x = b.geometry.gamma;
  const SystemModel model = b.plant.model_at(0.56);
  const ConstraintRow row = clf_row(model, nullptr, x, b.certs.V, b.certs.alpha3, b.certs.target_A);
  EXPECT_EQ(row.coeff_u(0), 0.0);
  EXPECT_NEAR(row.constant, 0.0, 1e-15);
}

TEST(ReciprocalBarrier, ValuesAndChainRule) {
  const ScalarField2 h = linear_field(1.0);
  const ScalarField2 B = mg::reciprocal_barrier(h);
  EXPECT_NEAR(B.value(vec({1.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(B.gradient(vec({1.0}))(0), -0.5, 1e-15);
  EXPECT_NEAR(B.value(vec({1e-6})), -std::log(1e-6 / (1 + 1e-6)), 1e-12);
  EXPECT_NEAR(B.value(vec({1e-6})), 13.8155, 1e-4);
  EXPECT_TRUE(std::isinf(B.value(vec({0.0}))));
}

TEST(ReciprocalBarrier, TwoDimensionalGradient) {
  // h(x) = x_1 at (1, 0): grad B = (-0.5, 0)
  ScalarField2 h;
  h.value = [](const Vec& x) { return x(0); };
  h.gradient = [](const Vec&) { return vec({1.0, 0.0}); };
  h.hessian = [](const Vec&) { return Mat::Zero(2, 2); };
  const Vec g = mg::reciprocal_barrier(h).gradient(vec({1.0, 0.0}));
  EXPECT_NEAR(g(0), -0.5, 1e-15);
  EXPECT_EQ(g(1), 0.0);
}

TEST(CbfRow, BoundaryStateRaisesSafetyViolation) {
  const auto b = mg::problem1_bundle();
  const SystemModel model = b.plant.model_at(0.63);
  const Vec x = vec({0.50, 0.653});
  EXPECT_NEAR(b.certs.barriers[1].h.value(x), 0.0, 1e-15);
  EXPECT_THROW(cbf_row(model, nullptr, x, b.certs.barriers[1]), SafetyViolation);
}

TEST(CbfRow, InteriorSlackness) {
  // far from the boundary: grad B ~ 0, row ~ -a3(h)
  SystemModel m = integrator_1d(0.01);
  BarrierEntry e;
  e.name = "far";
  e.h = ScalarField2::constant(1, 1e6);
  e.B = mg::reciprocal_barrier(e.h);
  const ConstraintRow row = cbf_row(m, nullptr, vec({0.0}), e);
  EXPECT_EQ(row.coeff_u(0), 0.0);
  EXPECT_NEAR(row.constant, -0.1 * 1e6, 1e-6);
}

TEST(SynthesizeStep, TargetCentreNeedsNoAction) {
  auto b = bundle_with_exact_target();
  b.certs.barriers.clear();
  const double mu = 0.56;
  const SynthesisResult r = synthesize_step(b.plant, b.certs, b.synthesis, b.geometry.gamma, mu, 1e-3);
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.v(0), 0.0, 1e-15);
  EXPECT_NEAR(r.mu_next, mu, 1e-15);
  EXPECT_NEAR(r.slack, 0.0, 1e-15);
}

TEST(SynthesizeStep, SingleSoftClfRowMatchesClosedForm) {
  // row 2 v + 0.5 <= s; minimizing v^2 + W s^2 gives v = -2 W 0.5 / (1 + 4 W)
  SystemModel m = integrator_1d(0.0);
  m.drift = [](const Vec&) { return vec({0.25}); };
  SynthesisPlant plant{[m](double) { return m; }, {}};
  CertificateSet certs;
  certs.V = ScalarField2::quadratic(Mat::Identity(1, 1), Vec::Zero(1));  // grad 2x
  certs.alpha3 = ClassK::linear(1e-12);
  certs.target_A = Region::point(vec({1.0}));
  SynthesisConfig cfg = wide_box_config();
  cfg.clf_slack_weight = 1e6;
  const Vec x = vec({1.0});
  const SynthesisResult r = synthesize_step(plant, certs, cfg, x, 0.7, 1e-3);
  ASSERT_TRUE(r.feasible);
  const double W = 1e6;
  EXPECT_NEAR(r.v(0), -2.0 * W * 0.5 / (1.0 + 4.0 * W), 1e-12);
  EXPECT_NEAR(r.slack, 2.0 * r.v(0) + 0.5, 1e-12);
  EXPECT_EQ(r.mu_next, 0.7);
  // brute-force check of the objective over a fine v grid
  double best = 1e300;
  for (int i = -20000; i <= 0; ++i) {
    const double v = i * 2.5e-5;
    const double s = std::max(0.0, 2 * v + 0.5);
    best = std::min(best, v * v + W * s * s);
  }
  EXPECT_LE(r.v(0) * r.v(0) + W * r.slack * r.slack, best + 1e-9);
}

TEST(SynthesizeStep, ContradictoryBarriersAreInfeasible) {
  const SystemModel m = integrator_1d(1.0);
  SynthesisPlant plant{[m](double) { return m; }, {}};
  CertificateSet certs;
  certs.V = ScalarField2::quadratic(Mat::Identity(1, 1), Vec::Zero(1));
  certs.target_A = Region::point(Vec::Zero(1));
  for (double slope : {1.0, -1.0}) {
    BarrierEntry e;
    e.name = slope > 0 ? "up" : "down";
    e.h = ScalarField2::constant(1, 1.0);
    e.B = linear_field(slope);
    certs.barriers.push_back(e);
  }
  const SynthesisConfig cfg = wide_box_config();
  EXPECT_FALSE(synthesize_step(plant, certs, cfg, vec({0.0}), 0.7, 1e-3).feasible);

  RasSpec spec;
  spec.X0 = Region::point(Vec::Zero(1));
  spec.Gamma = Region::ball(vec({5.0}), 0.1);
  spec.workspace_radius = 10.0;
  SimConfig sim;
  sim.dt = 1e-3;
  sim.horizon = 0.1;
  const Policy policy = make_synthesis_policy(plant, certs, cfg, sim.dt);
  const SamplePath path = simulate(plant.model_at, 0.7, policy, DisturbanceGen::zero(), vec({0.0}), spec, sim);
  EXPECT_EQ(path.terminated_reason, TerminationReason::SynthesisInfeasible);
  EXPECT_EQ(path.size(), 1u);
}

TEST(SynthesizeStep, RespectsBoxAndMuWindow) {
  const auto b = mg::problem1_bundle();
  const double dt = 1e-3;
  for (const Vec& x : {vec({0.47, 0.655}), vec({0.44, 0.648}), vec({0.455, 0.66})}) {
    for (double mu : {0.5, 0.56, 0.63, 1.0}) {
      const SynthesisResult r = synthesize_step(b.plant, b.certs, b.synthesis, x, mu, dt);
      if (!r.feasible) continue;
      EXPECT_GE(r.v(0), b.synthesis.input_box.lo(0));
      EXPECT_LE(r.v(0), b.synthesis.input_box.hi(0));
      EXPECT_LE(std::abs(r.mu_next - mu), b.synthesis.mu_rate * dt + 1e-15);
      EXPECT_GE(r.mu_next, b.synthesis.mu_lo);
      EXPECT_LE(r.mu_next, b.synthesis.mu_hi);
      EXPECT_GE(r.slack, 0.0);
    }
  }
}

TEST(SynthesizeStep, Deterministic) {
  const auto b = mg::problem1_bundle();
  const Vec x = vec({0.46, 0.652});
  const SynthesisResult r1 = synthesize_step(b.plant, b.certs, b.synthesis, x, 0.6, 1e-3);
  const SynthesisResult r2 = synthesize_step(b.plant, b.certs, b.synthesis, x, 0.6, 1e-3);
  ASSERT_EQ(r1.feasible, r2.feasible);
  if (r1.feasible) {
    EXPECT_EQ(r1.v(0), r2.v(0));
    EXPECT_EQ(r1.mu_next, r2.mu_next);
    EXPECT_EQ(r1.active_set, r2.active_set);
  }
}

TEST(SynthesizeStep, ZeroSlackGivesLyapunovDecrease) {
  // dX = -X dt + b v dt + 0.05 diag(X) dW with b = (1, 0), V = |x|^2
  SystemModel m;
  m.n = 2;
  m.m = 2;
  m.p = 1;
  m.drift = [](const Vec& x) { return Vec(-x); };
  m.control_matrix = [](const Vec&) { return Mat(Mat::Identity(2, 1)); };
  m.diffusion = [](const Vec& x) { return Mat(Mat(0.05 * x.asDiagonal())); };
  m.delta = 0.01;
  SynthesisPlant plant{[m](double) { return m; }, {}};
  CertificateSet certs;
  certs.V = ScalarField2::quadratic(Mat::Identity(2, 2), Vec::Zero(2));
  certs.target_A = Region::point(Vec::Zero(2));
  certs.alpha3 = ClassK::linear(0.1);
  const SynthesisConfig cfg = wide_box_config();
  const double dt = 1e-4;
  int checked = 0;
  for (const Vec& x : {vec({0.3, 0.2}), vec({-0.1, 0.4}), vec({0.05, -0.05})}) {
    const SynthesisResult r = synthesize_step(plant, certs, cfg, x, 0.7, dt);
    ASSERT_TRUE(r.feasible);
    if (r.slack != 0.0) continue;
    ++checked;
    CounterRng rng = derive_trial_rng(31, static_cast<std::uint64_t>(checked));
    const int n = 10000;
    const double v0 = certs.V.value(x);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec dW = vec({std::sqrt(dt) * rng.normal(), std::sqrt(dt) * rng.normal()});
      const Vec d = 0.01 * x.normalized();  // worst-case direction
      const double dv = certs.V.value(em_step(m, x, r.v, d, dt, dW)) - v0;
      sum += dv;
      sumsq += dv * dv;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    const double bound = -certs.alpha3(certs.target_A.distance(x)) * dt;
    EXPECT_LE(mean, bound + 3.0 * se + dt * dt);
  }
  EXPECT_EQ(checked, 3);
}
