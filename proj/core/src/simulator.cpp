#include "stochras/simulator.hpp"

#include <cmath>
#include <sstream>

namespace stochras {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive");
  if (dt > horizon) throw ConfigError("dt must not exceed the horizon");
  if (record_every < 1) throw ConfigError("record_every must be >= 1");
}

std::int64_t SimConfig::steps() const {
  const double ratio = horizon / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
    return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(ratio));
}

Vec DisturbanceGen::Stream::next(double t, CounterRng& rng) {
  return std::visit(
      [&](const auto& v) -> Vec {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Zero>) {
          return Vec::Zero(n_);
        } else if constexpr (std::is_same_v<T, ConstantVector>) {
          return v.d;
        } else if constexpr (std::is_same_v<T, RademacherPerStep>) {
          Vec d(n_);
          for (int i = 0; i < n_; ++i) {
            const double mag = v.magnitude.size() == 1 ? v.magnitude(0) : v.magnitude(i);
            d(i) = mag * rng.sign();
          }
          return d;
        } else {
          if (held_.size() == 0 || t >= next_switch_) {
            // uniform in the ball: Gaussian direction, radius ~ U^{1/n}
            Vec dir(n_);
            for (int i = 0; i < n_; ++i) dir(i) = rng.normal();
            const double norm = dir.norm();
            const double r = v.radius * std::pow(rng.uniform(), 1.0 / n_);
            held_ = norm > 0.0 ? Vec(dir * (r / norm)) : Vec(Vec::Zero(n_));
            next_switch_ = t + v.hold_time;
          }
          return held_;
        }
      },
      gen_->variant());
}

std::string DisturbanceGen::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Zero>) {
          os << "zero";
        } else if constexpr (std::is_same_v<T, ConstantVector>) {
          os << "constant(";
          for (Eigen::Index i = 0; i < v.d.size(); ++i) os << (i ? "," : "") << v.d(i);
          os << ")";
        } else if constexpr (std::is_same_v<T, RademacherPerStep>) {
          os << "rademacher_per_step(";
          for (Eigen::Index i = 0; i < v.magnitude.size(); ++i)
            os << (i ? "," : "") << v.magnitude(i);
          os << ")";
        } else {
          os << "random_ball(r=" << v.radius << ", hold=" << v.hold_time << ")";
        }
      },
      variant_);
  return os.str();
}

Policy zero_policy(int p) {
  return [p](const Vec&, double, double param) { return PolicyDecision{Vec::Zero(p), param}; };
}

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::HorizonReached:
      return "HorizonReached";
    case TerminationReason::Exploded:
      return "Exploded";
    case TerminationReason::Unsafe:
      return "Unsafe";
    case TerminationReason::SynthesisInfeasible:
      return "SynthesisInfeasible";
  }
  return "Unknown";
}

namespace {

Vec row_of(const std::vector<double>& data, int width, std::size_t k) {
  Vec v(width);
  for (int i = 0; i < width; ++i) v(i) = data[k * static_cast<std::size_t>(width) + i];
  return v;
}

void append(std::vector<double>& data, const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
}

}  // namespace

Vec SamplePath::state(std::size_t k) const { return row_of(states, n, k); }
Vec SamplePath::control(std::size_t k) const { return row_of(controls, p, k); }
Vec SamplePath::disturbance(std::size_t k) const { return row_of(disturbances, n, k); }

Vec em_step(const SystemModel& model, const Vec& x, const Vec& u, const Vec& d, double dt,
            const Vec& dW) {
  Vec rate = model.drift(x) + d;
  if (model.p > 0) rate += model.b(x) * u;
  Vec next = x + rate * dt;
  if (model.m > 0) next += model.diffusion(x) * dW;
  return next;
}

SamplePath simulate(const ModelFamily& family, double param0, const Policy& policy,
                    const DisturbanceGen& dist, const Vec& x0, const RasSpec& spec,
                    const SimConfig& cfg, CounterRng rng) {
  cfg.validate();
  if (!spec.in_safe(x0)) throw PreconditionError("initial state is not in the safe region D");

  double param = param0;
  SystemModel model = family(param);
  model.validate();
  if (x0.size() != model.n) throw ConfigError("initial state has the wrong dimension");

  SamplePath path;
  path.n = model.n;
  path.p = model.p;
  const std::int64_t n_steps = cfg.steps();
  path.times.reserve(static_cast<std::size_t>(n_steps / cfg.record_every + 8));

  auto record = [&](double t, const Vec& x, const Vec& u, const Vec& d) {
    path.times.push_back(t);
    append(path.states, x);
    append(path.controls, u);
    append(path.disturbances, d);
    path.params.push_back(param);
    return path.times.size() - 1;
  };

  const Vec zero_u = Vec::Zero(model.p);
  const Vec zero_d = Vec::Zero(model.n);
  DisturbanceGen::Stream dstream = dist.stream(model.n);
  Vec x = x0;
  Vec dW(model.m);

  for (std::int64_t k = 0;; ++k) {
    const double t = (k == n_steps) ? cfg.horizon : static_cast<double>(k) * cfg.dt;

    // Events at the current grid point.
    if (!x.allFinite() || !spec.in_workspace(x)) {
      const std::size_t idx = record(t, x, zero_u, zero_d);
      path.sigma_star_idx = idx;
      path.sigma_idx = idx;
      path.terminated_reason = TerminationReason::Exploded;
      break;
    }
    if (!spec.in_safe(x)) {
      path.sigma_idx = record(t, x, zero_u, zero_d);
      path.terminated_reason = TerminationReason::Unsafe;
      break;
    }
    bool force = (k == 0);
    bool gamma_now = false;
    bool stay_exit_now = false;
    if (!path.gamma_idx && spec.in_gamma(x)) {
      gamma_now = true;
      force = true;
    }
    if ((path.gamma_idx || gamma_now) && !path.stay_exit_idx && !spec.in_gamma_inflated(x)) {
      stay_exit_now = true;
      force = true;
    }
    auto mark = [&](std::size_t idx) {
      if (gamma_now) path.gamma_idx = idx;
      if (stay_exit_now) path.stay_exit_idx = idx;
    };

    if (k == n_steps) {
      mark(record(t, x, zero_u, zero_d));
      path.terminated_reason = TerminationReason::HorizonReached;
      break;
    }

    PolicyDecision decision = policy(x, t, param);
    if (decision.infeasible) {
      mark(record(t, x, zero_u, zero_d));
      path.terminated_reason = TerminationReason::SynthesisInfeasible;
      break;
    }
    if (decision.param != param) {
      param = decision.param;
      model = family(param);
    }
    const double h = std::min(cfg.dt, cfg.horizon - t);
    Vec d = dstream.next(t, rng);
    const double sqrt_h = std::sqrt(h);
    for (int i = 0; i < model.m; ++i) dW(i) = sqrt_h * rng.normal();

    Vec next;
    try {
      next = em_step(model, x, decision.u, d, h, dW);
    } catch (const DomainError&) {
      const std::size_t idx = record(t, x, zero_u, zero_d);
      path.sigma_star_idx = idx;
      path.sigma_idx = idx;
      path.terminated_reason = TerminationReason::Exploded;
      break;
    }
    if (force || k % cfg.record_every == 0) mark(record(t, x, decision.u, d));
    x = next;
    path.integration_steps = k + 1;
  }
  return path;
}

SamplePath simulate(const ModelFamily& family, double param0, const Policy& policy,
                    const DisturbanceGen& dist, const Vec& x0, const RasSpec& spec,
                    const SimConfig& cfg) {
  return simulate(family, param0, policy, dist, x0, spec, cfg, derive_trial_rng(cfg.seed, 0));
}

SamplePath simulate(const SystemModel& model, const Policy& policy, const DisturbanceGen& dist,
                    const Vec& x0, const RasSpec& spec, const SimConfig& cfg) {
  ModelFamily family = [&model](double) { return model; };
  return simulate(family, 0.0, policy, dist, x0, spec, cfg);
}

}  // namespace stochras
