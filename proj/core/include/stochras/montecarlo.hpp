#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stochras/ras_spec.hpp"
#include "stochras/simulator.hpp"

namespace stochras {

/// Finite-horizon reading of the RAS event for one path.
struct TrialOutcome {
  bool reached = false;  ///< gamma < horizon
  bool stayed = false;   ///< in inflated Gamma at every recorded state from gamma on
  bool safe = false;     ///< never left D
  bool exploded = false;
  bool synthesis_infeasible = false;
  bool ras = false;  ///< reached && stayed && safe && !synthesis_infeasible
  std::optional<double> gamma_time;
};

TrialOutcome classify(const SamplePath& path, const RasSpec& spec);

struct BinomialInterval {
  double lower = 0.0;
  double upper = 1.0;
};

/// q-quantile of Beta(a, b) by bisection on the regularized incomplete Beta
/// function, to 1e-10 or better.
double beta_quantile(double q, double a, double b);

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
BinomialInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence);

struct Estimate {
  std::uint64_t n_trials = 0;
  std::uint64_t n_success = 0;
  std::uint64_t n_infeasible = 0;
  double confidence = 0.95;
  // Unconditional: infeasible-terminated trials count as failures.
  double point = 0.0;
  double cp_lower = 0.0;
  double cp_upper = 1.0;
  // Conditional: infeasible-terminated trials excluded.
  std::uint64_t conditional_trials = 0;
  std::uint64_t conditional_success = 0;
  double conditional_point = 0.0;
  double conditional_cp_lower = 0.0;
  double conditional_cp_upper = 1.0;
};

Estimate summarize(std::span<const TrialOutcome> outcomes, double confidence);

/// Produces the outcome of trial `index` from its private stream.
using TrialFn = std::function<TrialOutcome(std::uint64_t index, CounterRng rng)>;

struct EstimateResult {
  Estimate estimate;
  std::vector<TrialOutcome> outcomes;  ///< indexed by trial
};

/// Runs n_trials independent trials on `threads` workers (0 = hardware
/// concurrency). Trial i always uses derive_trial_rng(master_seed, i), so the
/// result does not depend on scheduling.
EstimateResult estimate_trials(const TrialFn& trial, std::uint64_t n_trials, double confidence,
                               std::uint64_t master_seed, unsigned threads = 0);

/// Everything needed to simulate one controlled path.
struct Experiment {
  ModelFamily family;
  double param0 = 0.0;
  Policy policy;
  DisturbanceGen disturbance;
  Vec x0;
  SimConfig sim;
};

EstimateResult estimate(const Experiment& experiment, const RasSpec& spec, std::uint64_t n_trials,
                        double confidence, std::uint64_t master_seed, unsigned threads = 0);

}  // namespace stochras
