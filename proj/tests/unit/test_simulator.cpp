#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stochras/rng.hpp"
#include "stochras/simulator.hpp"

using namespace stochras;

namespace {

SystemModel model_1d(std::function<double(double)> f, double sigma) {
  SystemModel m;
  m.n = 1;
  m.m = 1;
  m.p = 0;
  m.drift = [f](const Vec& x) { return vec({f(x(0))}); };
  m.diffusion = [sigma](const Vec&) { return Mat::Constant(1, 1, sigma); };
  return m;
}

RasSpec wide_spec(int n, double radius = 100.0) {
  RasSpec s;
  s.X0 = Region::point(Vec::Zero(n));
  s.Gamma = Region::ball(Vec::Constant(n, 1000.0), 1.0);
  s.workspace_center = Vec::Zero(n);
  s.workspace_radius = radius;
  s.horizon = 1.0;
  return s;
}

}  // namespace

// ---- RNG ----

TEST(Rng, DeterministicPerSeedAndIndex) {
  CounterRng a = derive_trial_rng(42, 0), b = derive_trial_rng(42, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, DistinctTrialStreams) {
  CounterRng a = derive_trial_rng(42, 0), b = derive_trial_rng(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += (a.normal() == b.normal());
  EXPECT_EQ(equal, 0);
}

TEST(Rng, GaussianMomentsWithinFourStandardErrors) {
  CounterRng rng = derive_trial_rng(2718, 3);
  const int n = 1000000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(n));
  EXPECT_LE(std::abs(var - 1.0), 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, UniformInUnitInterval) {
  CounterRng rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, Mix64IsInjectiveOnSample) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t i = 0; i < 10000; ++i) out.push_back(mix64(i));
  std::sort(out.begin(), out.end());
  EXPECT_EQ(std::adjacent_find(out.begin(), out.end()), out.end());
}

// ---- em_step ----

TEST(EmStep, DeterministicEuler) {
  const SystemModel m = model_1d([](double x) { return -x; }, 0.0);
  EXPECT_DOUBLE_EQ(em_step(m, vec({1.0}), Vec(), vec({0.0}), 0.1, vec({123.0}))(0), 0.9);
}

TEST(EmStep, PureDiffusion) {
  const SystemModel m = model_1d([](double) { return 0.0; }, 1.0);
  EXPECT_DOUBLE_EQ(em_step(m, vec({0.0}), Vec(), vec({0.0}), 0.1, vec({0.05}))(0), 0.05);
}

TEST(EmStep, ControlAndDisturbanceEnterDrift) {
  SystemModel m = model_1d([](double) { return 1.0; }, 0.0);
  m.p = 1;
  m.control_matrix = [](const Vec&) { return Mat::Constant(1, 1, 2.0); };
  // x + (1 + 0.5 + 2*0.25) * 0.1
  EXPECT_DOUBLE_EQ(em_step(m, vec({0.0}), vec({0.25}), vec({0.5}), 0.1, vec({0.0}))(0), 0.2);
}

// ---- simulate ----

TEST(Simulate, SingleStepPath) {
  const SystemModel m = model_1d([](double x) { return -x; }, 0.0);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.horizon = 0.01;
  const SamplePath p = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({1.0}), wide_spec(1), cfg);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.times[0], 0.0);
  EXPECT_EQ(p.times[1], 0.01);
  EXPECT_EQ(p.terminated_reason, TerminationReason::HorizonReached);
}

TEST(Simulate, RejectsHorizonShorterThanStep) {
  const SystemModel m = model_1d([](double x) { return -x; }, 0.0);
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.horizon = 0.05;
  EXPECT_THROW(simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({1.0}), wide_spec(1), cfg),
               ConfigError);
}

TEST(Simulate, StationaryInsideTarget) {
  const SystemModel m = model_1d([](double) { return 0.0; }, 0.0);
  RasSpec spec = wide_spec(1);
  spec.Gamma = Region::ball(vec({0.0}), 0.1);
  SimConfig cfg;
  cfg.dt = 0.1;
  const SamplePath p = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({0.0}), spec, cfg);
  ASSERT_TRUE(p.gamma_idx.has_value());
  EXPECT_EQ(*p.gamma_idx, 0u);
  EXPECT_FALSE(p.sigma_idx);
  EXPECT_FALSE(p.sigma_star_idx);
}

TEST(Simulate, ReproducesForwardEulerBitwise) {
  const auto f = [](double x) { return std::sin(3.0 * x) - 0.7 * x * x * x; };
  const SystemModel m = model_1d(f, 0.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 2.0;
  cfg.seed = 11;
  const SamplePath p = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({0.4}), wide_spec(1), cfg);
  double x = 0.4;
  ASSERT_EQ(p.size(), 2001u);
  for (std::size_t k = 0; k < p.size(); ++k) {
    ASSERT_EQ(p.state(k)(0), x) << "row " << k;
    x = x + (f(x) + 0.0) * cfg.dt;
  }
}

TEST(Simulate, VarianceOfScaledBrownianMotion) {
  const double sigma = 0.7;
  const SystemModel m = model_1d([](double) { return 0.0; }, sigma);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.record_every = 1000;
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const SamplePath p = simulate([&m](double) { return m; }, 0.0, zero_policy(0),
                                  DisturbanceGen::zero(), vec({0.0}), wide_spec(1), cfg,
                                  derive_trial_rng(77, static_cast<std::uint64_t>(i)));
    const double x = p.state(p.size() - 1)(0);
    sum += x;
    sumsq += x * x;
  }
  const double var = sumsq / n - (sum / n) * (sum / n);
  EXPECT_NEAR(var, sigma * sigma, 0.05 * sigma * sigma);
}

TEST(Simulate, InsertedUnsafeStateSetsSigmaIndex) {
  // Unit drift from 0 with dt = 0.1: the state enters U = {x >= 0.55} at step 6.
  const SystemModel m = model_1d([](double) { return 1.0; }, 0.0);
  RasSpec spec = wide_spec(1);
  spec.Unsafe = Region::level_set([](const Vec& x) { return x(0) - 0.55; }, "right");
  SimConfig cfg;
  cfg.dt = 0.1;
  cfg.horizon = 2.0;
  for (int thin : {1, 4, 5}) {
    cfg.record_every = thin;
    const SamplePath p = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({0.0}), spec, cfg);
    ASSERT_TRUE(p.sigma_idx.has_value());
    EXPECT_NEAR(p.times[*p.sigma_idx], 0.6, 1e-12) << "record_every " << thin;
    EXPECT_FALSE(spec.in_safe(p.state(*p.sigma_idx)));
    for (std::size_t k = 0; k < *p.sigma_idx; ++k) EXPECT_TRUE(spec.in_safe(p.state(k)));
    EXPECT_EQ(p.terminated_reason, TerminationReason::Unsafe);
  }
}

TEST(Simulate, ThinningKeepsEventTimes) {
  const SystemModel m = model_1d([](double x) { return -x; }, 0.3);
  RasSpec spec = wide_spec(1, 3.0);
  spec.Gamma = Region::ball(vec({0.0}), 0.2);
  spec.stay_tolerance = 0.05;
  spec.Unsafe = Region::level_set([](const Vec& x) { return x(0) - 2.5; }, "far");
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 5.0;
  cfg.seed = 3;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    cfg.record_every = 1;
    const SamplePath full = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({1.0}), spec, cfg);
    cfg.record_every = 37;
    const SamplePath thin = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({1.0}), spec, cfg);
    ASSERT_EQ(full.gamma_idx.has_value(), thin.gamma_idx.has_value());
    if (full.gamma_idx) EXPECT_EQ(full.times[*full.gamma_idx], thin.times[*thin.gamma_idx]);
    ASSERT_EQ(full.stay_exit_idx.has_value(), thin.stay_exit_idx.has_value());
    if (full.stay_exit_idx)
      EXPECT_EQ(full.times[*full.stay_exit_idx], thin.times[*thin.stay_exit_idx]);
    EXPECT_EQ(full.times.back(), thin.times.back());
    EXPECT_EQ(full.state(full.size() - 1)(0), thin.state(thin.size() - 1)(0));
    EXPECT_LT(thin.size(), full.size());
  }
}

TEST(Simulate, BrownianMotionLeavesSmallWorkspace) {
  const SystemModel m = model_1d([](double) { return 0.0; }, 1.0);
  RasSpec spec = wide_spec(1, 0.1);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 10.0;
  cfg.record_every = 1000;
  int exited = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    cfg.seed = static_cast<std::uint64_t>(i);
    const SamplePath p = simulate(m, zero_policy(0), DisturbanceGen::zero(), vec({0.0}), spec, cfg);
    if (p.sigma_star_idx) {
      ++exited;
      EXPECT_EQ(p.terminated_reason, TerminationReason::Exploded);
      EXPECT_GE(*p.sigma_star_idx, *p.sigma_idx);
    }
  }
  EXPECT_GE(exited, static_cast<int>(0.99 * n));
}

TEST(Simulate, InfeasiblePolicyTruncatesPath) {
  const SystemModel m = model_1d([](double) { return 0.0; }, 0.0);
  SimConfig cfg;
  cfg.dt = 0.1;
  Policy p = [](const Vec&, double t, double param) {
    if (t > 0.25) return PolicyDecision::make_infeasible();
    return PolicyDecision{Vec(), param};
  };
  const SamplePath path = simulate(m, p, DisturbanceGen::zero(), vec({0.0}), wide_spec(1), cfg);
  EXPECT_EQ(path.terminated_reason, TerminationReason::SynthesisInfeasible);
  EXPECT_NEAR(path.times.back(), 0.3, 1e-12);
}

TEST(Simulate, SameSeedSamePath) {
  const SystemModel m = model_1d([](double x) { return -x; }, 0.5);
  SimConfig cfg;
  cfg.seed = 1234;
  const auto dist = DisturbanceGen::rademacher(vec({0.1}));
  const SamplePath a = simulate(m, zero_policy(0), dist, vec({0.3}), wide_spec(1), cfg);
  const SamplePath b = simulate(m, zero_policy(0), dist, vec({0.3}), wide_spec(1), cfg);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.disturbances, b.disturbances);
}

TEST(Disturbance, SamplesRespectDeclaredBounds) {
  CounterRng rng(8);
  auto rad = DisturbanceGen::rademacher(vec({0.1, 0.2}));
  auto rs = rad.stream(2);
  auto ball = DisturbanceGen::random_ball(0.3, 0.05);
  auto bs = ball.stream(2);
  int pos = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec d = rs.next(i * 1e-3, rng);
    EXPECT_DOUBLE_EQ(std::abs(d(0)), 0.1);
    EXPECT_DOUBLE_EQ(std::abs(d(1)), 0.2);
    pos += d(0) > 0;
    EXPECT_LE(bs.next(i * 1e-3, rng).norm(), 0.3 + 1e-15);
  }
  EXPECT_NEAR(pos / 10000.0, 0.5, 0.02);
}

TEST(Disturbance, BallSignalIsHeldConstant) {
  CounterRng rng(9);
  auto ball = DisturbanceGen::random_ball(1.0, 0.1);
  auto s = ball.stream(2);
  const Vec first = s.next(0.0, rng);
  EXPECT_EQ(s.next(0.05, rng), first);
  EXPECT_NE(s.next(0.1, rng), first);
}
