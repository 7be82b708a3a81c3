#include <gtest/gtest.h>

#include <cmath>

#include "stochras/moore_greitzer.hpp"

using namespace stochras;
using namespace stochras::mg;

// Fixtures from an independent 50-digit bisection oracle
// (tests/oracles/mg_oracles.py).

TEST(PsiC, LowOffsetParameterValues) {
  const MgParams p = MgParams::low_offset();
  EXPECT_NEAR(psi_c(0.25, p), 0.3006, 1e-15);
  EXPECT_NEAR(psi_c(0.5, p), 0.4806, 1e-15);
}

TEST(PsiC, DefaultParameterValues) {
  const MgParams p;
  EXPECT_NEAR(psi_c(0.25, p), 0.4806, 1e-15);
  EXPECT_NEAR(psi_c(0.5, p), 0.6606, 1e-15);
}

TEST(PsiC, OddSymmetryAboutTheta) {
  for (const MgParams& p : {MgParams{}, MgParams::low_offset()}) {
    for (double w = -1.5; w <= 1.5; w += 0.125) {
      EXPECT_NEAR(psi_c(p.theta * (1 + w), p) + psi_c(p.theta * (1 - w), p), 2 * (p.a + p.iota),
                  1e-14);
    }
  }
}

TEST(PsiC, DerivativeMatchesDifferences) {
  const MgParams p;
  for (double phi : {0.1, 0.3, 0.5, 0.7}) {
    const double fd = (psi_c(phi + 1e-6, p) - psi_c(phi - 1e-6, p)) / 2e-6;
    EXPECT_NEAR(psi_c_derivative(phi, p), fd, 1e-8);
  }
}

TEST(MgModel, DriftLowOffsetExample) {
  const SystemModel m = mg_model(MgParams::low_offset(), 0.63);
  const Vec f = m.drift(vec({0.5, 0.6}));
  EXPECT_NEAR(f(0), (0.4806 - 0.6) / 8, 1e-15);
  EXPECT_NEAR(f(0), -0.0149, 1e-4);
  EXPECT_NEAR(f(1), (0.5 - 0.63 * std::sqrt(0.6)) / 128, 1e-16);
}

TEST(MgModel, EulerIncrementFixtures) {
  const Vec x = vec({0.5, 0.6});
  const Vec zero2 = Vec::Zero(2);
  const Vec inc = em_step(mg_model(MgParams{}, 0.63), x, vec({0.0}), zero2, 1e-3, zero2) - x;
  // the difference (x + h f) - x carries rounding of order ulp(0.6)
  EXPECT_NEAR(inc(0), 7.575e-6, 4e-16);
  EXPECT_NEAR(inc(1), 9.3782018577074003652e-8, 4e-16);
  const Vec f = mg_model(MgParams{}, 0.63).drift(x);
  EXPECT_NEAR(f(0) * 1e-3, 7.575e-6, 1e-20);
  EXPECT_NEAR(f(1) * 1e-3, 9.3782018577074003652e-8, 1e-21);
  const Vec inc_p = em_step(mg_model(MgParams::low_offset(), 0.63), x, vec({0.0}), zero2, 1e-3, zero2) - x;
  EXPECT_NEAR(inc_p(0), -1.4925e-5, 4e-16);
  EXPECT_NEAR(inc_p(1), 9.3782018577074003652e-8, 4e-16);
}

TEST(MgModel, GeneratorFixtures) {
  const auto V = slf(MgParams{});
  const Vec x = vec({0.5, 0.6});
  EXPECT_NEAR(generator_apply(mg_model(MgParams{}, 0.63), Vec::Zero(2), x, V),
              0.0037765904200198166162, 1e-15);
  EXPECT_NEAR(generator_apply(mg_model(MgParams::low_offset(), 0.63), Vec::Zero(2), x,
                              slf(MgParams::low_offset())),
              0.001808644825619389916, 1e-15);
}

TEST(MgModel, EquilibriumIsTrivialSolution) {
  for (double mu : {0.5, 0.56, 0.63, 0.8, 1.0}) {
    const Vec xe = equilibrium(mu).state();
    const SystemModel m = mg_model(MgParams{}, mu);
    EXPECT_LE(m.drift(xe).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(m.diffusion(xe).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(MgModel, DiffusionAtUnitPhiOffset) {
  const Equilibrium e = equilibrium(0.63);
  const Mat g = mg_model(MgParams{}, 0.63).diffusion(vec({e.phi + 1.0, e.psi}));
  EXPECT_NEAR(g(0, 0), 0.08, 1e-15);
  EXPECT_EQ(g(1, 1), 0.0);
  EXPECT_EQ(g(0, 1), 0.0);
  EXPECT_EQ(g(1, 0), 0.0);
}

TEST(MgModel, ControlEntersPhiOnly) {
  const Mat b = mg_model(MgParams{}, 0.63).b(vec({0.5, 0.6}));
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(1, 0), 0.0);
}

TEST(MgModel, NonPositivePsiIsDomainError) {
  EXPECT_THROW(mg_model(MgParams{}, 0.63).drift(vec({0.5, -0.1})), DomainError);
}

TEST(MgModel, DriftAffineInMu) {
  const MgParams p;
  const Vec x = vec({0.47, 0.66});
  const Vec f0 = mg_model(p, 0.6).drift(x);
  const Vec f1 = mg_model(p, 0.64).drift(x);
  EXPECT_NEAR((f1 - f0 - 0.04 * drift_mu_sensitivity(p, x)).norm(), 0.0, 1e-16);
}

TEST(Equilibrium, RegressionAgainstBisectionOracle) {
  const MgParams p;
  struct Row {
    double mu, phi, psi;
  };
  for (const Row& r : {Row{0.5, 0.39316563124284736285, 0.61831685436234653745},
                       Row{0.63, 0.51180976649306473412, 0.65998799969182526739},
                       Row{0.6301, 0.51188783336258833482, 0.65997981831126127755},
                       Row{1.0, 0.68697192610386000961, 0.47193042725484729769}}) {
    const Equilibrium e = equilibrium(r.mu, p);
    EXPECT_NEAR(e.phi, r.phi, 1e-10) << r.mu;
    EXPECT_NEAR(e.psi, r.psi, 1e-10) << r.mu;
  }
  const MgParams q = MgParams::low_offset();
  EXPECT_NEAR(equilibrium(0.5, q).phi, 0.29543666315302913833, 1e-10);
  EXPECT_NEAR(equilibrium(0.5, q).psi, 0.34913128773998561986, 1e-10);
  EXPECT_NEAR(equilibrium(0.63, q).phi, 0.42727050378883671354, 1e-10);
  EXPECT_NEAR(equilibrium(0.63, q).psi, 0.45996493677996051493, 1e-10);
  EXPECT_NEAR(equilibrium(0.6301, q).phi, 0.42736084824243129225, 1e-10);
  EXPECT_NEAR(equilibrium(1.0, q).phi, 0.62926480866032177753, 1e-10);
}

TEST(Equilibrium, ResidualsAndContinuity) {
  for (const MgParams& p : {MgParams{}, MgParams::low_offset()}) {
    for (double mu : {0.5, 0.63, 1.0}) {
      const Equilibrium e = equilibrium(mu, p);
      EXPECT_LE(std::abs(psi_c(e.phi, p) - e.psi), 1e-12);
      EXPECT_LE(std::abs(e.phi - mu * std::sqrt(e.psi)), 1e-12);
    }
    EXPECT_LE((equilibrium(0.63, p).state() - equilibrium(0.6301, p).state()).norm(), 1e-2);
  }
}

TEST(Equilibrium, OutOfRangeMuRejected) {
  EXPECT_THROW(equilibrium(0.4), PreconditionError);
  EXPECT_THROW(equilibrium(1.1), PreconditionError);
}

TEST(Equilibrium, MuForPhiInvertsBranch) {
  for (double mu : {0.52, 0.6, 0.75, 0.95}) {
    EXPECT_NEAR(mu_for_phi(equilibrium(mu).phi), mu, 1e-12);
  }
}

TEST(Geometry, BarrierValuesAtReferencePoints) {
  const MgSpec g;
  EXPECT_NEAR(h1_field(g).value(g.gamma), 0.055 - std::hypot(0.0381, 0.0113), 1e-15);
  EXPECT_NEAR(h1_field(g).value(g.gamma), 0.01526, 1e-5);
  EXPECT_GT(h2_field(g).value(g.gamma), 0.0);
  EXPECT_NEAR(h2_field(g).value(vec({0.50, 0.65})), -0.003, 1e-15);
}

TEST(Geometry, BarrierFieldDerivativesSelfCheck) {
  const MgSpec g;
  std::vector<Vec> pts{vec({0.45, 0.65}), vec({0.46, 0.64}), vec({0.52, 0.66})};
  for (const ScalarField2& f : {h1_field(g), h2_field(g), mg::reciprocal_barrier(h1_field(g)),
                                mg::reciprocal_barrier(h2_field(g)), slf(MgParams{}, g)}) {
    EXPECT_TRUE(check_field_derivatives(f, pts).passed);
  }
}

TEST(Slf, VanishesAtTargetAndIsSandwiched) {
  const MgParams p;
  const MgSpec g;
  const ScalarField2 V = slf(p, g);
  EXPECT_EQ(V.value(g.gamma), 0.0);
  for (double ang = 0.0; ang < 6.3; ang += 0.1) {
    for (double s : {1e-3, 0.01, 0.3, 2.0}) {
      const Vec x = g.gamma + s * vec({std::cos(ang), std::sin(ang)});
      EXPECT_GE(V.value(x), 4 * s * s * (1 - 1e-12));
      EXPECT_LE(V.value(x), 64 * s * s * (1 + 1e-12));
    }
  }
}

TEST(Problem1, BundleAssembly) {
  const Problem1Bundle b = problem1_bundle();
  EXPECT_NEAR((b.x0 - equilibrium(0.63).state()).norm(), 0.0, 0.0);
  EXPECT_TRUE(b.spec.in_gamma(b.geometry.gamma));
  EXPECT_FALSE(b.spec.in_safe(vec({0.50, 0.65})));
  EXPECT_TRUE(b.spec.in_safe(b.x0));
  EXPECT_NEAR(b.certs.R_outer, 0.01526, 1e-5);
  EXPECT_NO_THROW(b.certs.validate());
  EXPECT_NO_THROW(b.spec.validate());
  EXPECT_NEAR(equilibrium(b.mu_target).phi, b.geometry.gamma(0), 1e-12);
  EXPECT_THROW(problem1_bundle(0.6), PreconditionError);
}

TEST(Problem1, ReferenceInitialStateIsNearEquilibrium) {
  // With the default characteristic offset the alternate initial point sits on
  // the equilibrium curve to four digits.
  const MgSpec g;
  EXPECT_NEAR(psi_c(g.alternate_initial_state(0), MgParams{}), g.alternate_initial_state(1), 1e-4);
}
