#include "stochras/montecarlo.hpp"

#include <atomic>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace stochras {

void RasSpec::validate() const {
  if (!(required_p >= 0.0 && required_p <= 1.0)) throw ConfigError("required_p must be in [0, 1]");
  if (!(stay_tolerance >= 0.0)) throw ConfigError("stay_tolerance must be >= 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (!(workspace_radius > 0.0)) throw ConfigError("workspace radius must be positive");
  if (stay_tolerance > 0.0 && !Gamma.is_ball())
    throw ConfigError("a stay tolerance needs a ball-shaped target");
  // Gamma inside D, checked on the centre and boundary samples.
  if (Gamma.is_ball()) {
    const Vec& c = Gamma.center();
    const double r = Gamma.radius();
    std::vector<Vec> samples{c};
    if (c.size() == 2 && r > 0.0) {
      for (int j = 0; j < 64; ++j) {
        const double th = 2.0 * 3.14159265358979323846 * j / 64.0;
        samples.push_back(c + vec({r * std::cos(th), r * std::sin(th)}));
      }
    } else if (r > 0.0) {
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        Vec e = Vec::Zero(c.size());
        e(i) = r;
        samples.push_back(c + e);
        samples.push_back(c - e);
      }
    }
    for (const Vec& x : samples)
      if (!in_safe(x)) throw ConfigError("target set is not contained in the safe region D");
  }
}

bool RasSpec::in_workspace(const Vec& x) const {
  return (x - workspace_center).norm() <= workspace_radius;
}

bool RasSpec::in_safe(const Vec& x) const { return in_workspace(x) && !Unsafe.contains(x); }

bool RasSpec::in_gamma(const Vec& x) const { return Gamma.contains(x); }

bool RasSpec::in_gamma_inflated(const Vec& x) const {
  if (stay_tolerance == 0.0) return Gamma.contains(x);
  return Gamma.distance(x) <= stay_tolerance;
}

TrialOutcome classify(const SamplePath& path, const RasSpec& spec) {
  TrialOutcome out;
  out.exploded = path.sigma_star_idx.has_value();
  out.safe = !path.sigma_idx.has_value();
  out.synthesis_infeasible = path.terminated_reason == TerminationReason::SynthesisInfeasible;
  if (path.gamma_idx) {
    out.reached = true;
    out.gamma_time = path.times[*path.gamma_idx];
    out.stayed = true;
    for (std::size_t k = *path.gamma_idx; k < path.size(); ++k) {
      if (!spec.in_gamma_inflated(path.state(k))) {
        out.stayed = false;
        break;
      }
    }
  }
  out.ras = out.reached && out.stayed && out.safe && !out.synthesis_infeasible;
  return out;
}

double beta_quantile(double q, double a, double b) {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (boost::math::ibeta(a, b, mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

BinomialInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence) {
  if (n == 0) throw ConfigError("Clopper-Pearson needs n >= 1");
  if (k > n) throw ConfigError("more successes than trials");
  if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
  const double alpha = 1.0 - confidence;
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  BinomialInterval out;
  out.lower = k == 0 ? 0.0 : beta_quantile(alpha / 2.0, kd, nd - kd + 1.0);
  out.upper = k == n ? 1.0 : beta_quantile(1.0 - alpha / 2.0, kd + 1.0, nd - kd);
  return out;
}

Estimate summarize(std::span<const TrialOutcome> outcomes, double confidence) {
  Estimate e;
  e.confidence = confidence;
  e.n_trials = outcomes.size();
  for (const TrialOutcome& o : outcomes) {
    if (o.synthesis_infeasible) {
      ++e.n_infeasible;
      continue;
    }
    if (o.ras) ++e.n_success;
  }
  e.conditional_trials = e.n_trials - e.n_infeasible;
  e.conditional_success = e.n_success;
  if (e.n_trials > 0) {
    e.point = static_cast<double>(e.n_success) / static_cast<double>(e.n_trials);
    const auto ci = clopper_pearson(e.n_success, e.n_trials, confidence);
    e.cp_lower = std::min(ci.lower, e.point);
    e.cp_upper = std::max(ci.upper, e.point);
  }
  if (e.conditional_trials > 0) {
    e.conditional_point =
        static_cast<double>(e.conditional_success) / static_cast<double>(e.conditional_trials);
    const auto ci = clopper_pearson(e.conditional_success, e.conditional_trials, confidence);
    e.conditional_cp_lower = std::min(ci.lower, e.conditional_point);
    e.conditional_cp_upper = std::max(ci.upper, e.conditional_point);
  }
  return e;
}

EstimateResult estimate_trials(const TrialFn& trial, std::uint64_t n_trials, double confidence,
                               std::uint64_t master_seed, unsigned threads) {
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  EstimateResult out;
  out.outcomes.resize(n_trials);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_trials));

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= n_trials) return;
      try {
        out.outcomes[i] = trial(i, derive_trial_rng(master_seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_trials);
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  out.estimate = summarize(out.outcomes, confidence);
  return out;
}

EstimateResult estimate(const Experiment& experiment, const RasSpec& spec, std::uint64_t n_trials,
                        double confidence, std::uint64_t master_seed, unsigned threads) {
  spec.validate();
  TrialFn trial = [&](std::uint64_t, CounterRng rng) {
    SamplePath path = simulate(experiment.family, experiment.param0, experiment.policy,
                               experiment.disturbance, experiment.x0, spec, experiment.sim, rng);
    return classify(path, spec);
  };
  return estimate_trials(trial, n_trials, confidence, master_seed, threads);
}

}  // namespace stochras
