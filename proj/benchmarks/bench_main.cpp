#include <benchmark/benchmark.h>

#include "stochras/certificates.hpp"
#include "stochras/moore_greitzer.hpp"
#include "stochras/qp.hpp"
#include "stochras/rng.hpp"
#include "stochras/sde_core.hpp"
#include "stochras/simulator.hpp"
#include "stochras/synthesis.hpp"

using namespace stochras;

namespace {

qp::QpProblem random_qp(int n, int m, std::uint64_t seed) {
  CounterRng rng(seed);
  Mat L = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) L(i, j) = rng.normal();
  Vec c(n);
  for (int i = 0; i < n; ++i) c(i) = rng.normal();
  qp::QpProblem p = qp::QpProblem::unconstrained(L * L.transpose() + Mat::Identity(n, n), c);
  for (int i = 0; i < m; ++i) {
    Vec a(n);
    for (int j = 0; j < n; ++j) a(j) = rng.normal();
    p.add_row(a, rng.uniform());
  }
  p.lb = Vec::Constant(n, -2.0);
  p.ub = Vec::Constant(n, 2.0);
  return p;
}

}  // namespace

static void BM_QpSolve(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const qp::QpProblem p = random_qp(n, n + 1, 17);
  for (auto _ : state) benchmark::DoNotOptimize(qp::solve(p));
}
BENCHMARK(BM_QpSolve)->Arg(2)->Arg(3)->Arg(6);

static void BM_QpEnumeration(benchmark::State& state) {
  const qp::QpProblem p = random_qp(3, 4, 17);
  qp::SolveOptions opt;
  opt.force_enumeration = true;
  for (auto _ : state) benchmark::DoNotOptimize(qp::solve(p, opt));
}
BENCHMARK(BM_QpEnumeration);

static void BM_EmStepMooreGreitzer(benchmark::State& state) {
  const SystemModel model = mg::mg_model(mg::MgParams{}, 0.63);
  const Vec u = vec({0.0});
  const Vec d = vec({0.1, -0.1});
  const Vec dW = vec({0.01, 0.0});
  const Vec x = mg::equilibrium(0.63).state();
  for (auto _ : state) benchmark::DoNotOptimize(em_step(model, x, u, d, 1e-3, dW));
}
BENCHMARK(BM_EmStepMooreGreitzer);

static void BM_WorstCaseGenerator(benchmark::State& state) {
  const mg::MgParams params;
  const SystemModel model = mg::mg_model(params, 0.63);
  const ScalarField2 V = mg::slf(params);
  const Vec x = vec({0.455, 0.655});
  for (auto _ : state) benchmark::DoNotOptimize(worst_case_generator(model, x, V));
}
BENCHMARK(BM_WorstCaseGenerator);

static void BM_SynthesisStep(benchmark::State& state) {
  const mg::Problem1Bundle b = mg::problem1_bundle(0.63);
  // A point in the safe set where only the Lyapunov row is binding.
  const Vec x = vec({0.47, 0.652});
  for (auto _ : state)
    benchmark::DoNotOptimize(synthesize_step(b.plant, b.certs, b.synthesis, x, 0.6, 1e-3));
}
BENCHMARK(BM_SynthesisStep);

static void BM_SimulateUncontrolled(benchmark::State& state) {
  const mg::Problem1Bundle b = mg::problem1_bundle(0.63);
  SimConfig sim;
  sim.dt = 1e-3;
  sim.horizon = 1.0;
  sim.record_every = 100;
  const DisturbanceGen dist = DisturbanceGen::rademacher(Vec::Constant(2, 0.1));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(b.plant.model_at, b.mu0, zero_policy(1), dist, b.x0, b.spec,
                                      sim, derive_trial_rng(1, trial++)));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SimulateUncontrolled);

BENCHMARK_MAIN();
