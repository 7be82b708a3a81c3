#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stochras/ras_spec.hpp"
#include "stochras/rng.hpp"
#include "stochras/sde_core.hpp"

namespace stochras {

struct SimConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  int record_every = 1;

  /// Throws ConfigError unless 0 < dt <= horizon and record_every >= 1.
  void validate() const;
  /// Number of integration steps; the last one is shortened to land on horizon.
  std::int64_t steps() const;
};

/// Disturbance signal xi(t) fed into the drift.
class DisturbanceGen {
 public:
  struct Zero {};
  struct ConstantVector {
    Vec d;
  };
  /// Fresh independent sign per coordinate per integration step.
  struct RademacherPerStep {
    Vec magnitude;
  };
  /// Uniform draw from the closed ball, held for hold_time.
  struct PiecewiseConstantRandomBall {
    double radius;
    double hold_time;
  };
  using Variant = std::variant<Zero, ConstantVector, RademacherPerStep, PiecewiseConstantRandomBall>;

  DisturbanceGen() = default;
  DisturbanceGen(Variant v) : variant_(std::move(v)) {}  // NOLINT(implicit)

  static DisturbanceGen zero() { return DisturbanceGen(Zero{}); }
  static DisturbanceGen constant(Vec d) { return DisturbanceGen(ConstantVector{std::move(d)}); }
  static DisturbanceGen rademacher(Vec magnitude) {
    return DisturbanceGen(RademacherPerStep{std::move(magnitude)});
  }
  static DisturbanceGen random_ball(double radius, double hold_time) {
    return DisturbanceGen(PiecewiseConstantRandomBall{radius, hold_time});
  }

  /// Per-path sampler; holds the piecewise-constant state.
  class Stream {
   public:
    Stream(const DisturbanceGen& gen, int n) : gen_(&gen), n_(n) {}
    Vec next(double t, CounterRng& rng);

   private:
    const DisturbanceGen* gen_;
    int n_;
    Vec held_;
    double next_switch_ = 0.0;
  };

  Stream stream(int n) const { return Stream(*this, n); }
  const Variant& variant() const { return variant_; }
  std::string describe() const;

 private:
  Variant variant_ = Zero{};
};

/// Control decision for one integration step: the input u and the scheduling
/// parameter (e.g. the throttle mu) the model is evaluated at.
struct PolicyDecision {
  Vec u;
  double param = 0.0;
  bool infeasible = false;
  static PolicyDecision make_infeasible() { return {Vec(), 0.0, true}; }
};

/// (state, time, current parameter) -> decision.
using Policy = std::function<PolicyDecision(const Vec& x, double t, double param)>;
/// Parameter -> model. Called again only when the parameter changes.
using ModelFamily = std::function<SystemModel(double param)>;

/// Policy applying u = 0 and keeping the parameter fixed.
Policy zero_policy(int p);

enum class TerminationReason { HorizonReached, Exploded, Unsafe, SynthesisInfeasible };
std::string to_string(TerminationReason r);

/// Recorded trajectory. Row k of every matrix belongs to times[k]; the
/// control/disturbance on a row are the ones applied on [t_k, t_{k+1}), and
/// are zero on the terminal row. Rows where a stopping event happens are
/// always recorded regardless of thinning, so the indices below are exact.
struct SamplePath {
  int n = 0;
  int p = 0;
  std::vector<double> times;
  std::vector<double> states;        ///< rows x n
  std::vector<double> controls;      ///< rows x p
  std::vector<double> disturbances;  ///< rows x n
  std::vector<double> params;        ///< scheduling parameter per row
  std::optional<std::size_t> sigma_star_idx;  ///< first exit from the workspace
  std::optional<std::size_t> sigma_idx;       ///< first exit from D
  std::optional<std::size_t> gamma_idx;       ///< first entry into Gamma
  std::optional<std::size_t> stay_exit_idx;   ///< first exit from inflated Gamma after gamma
  TerminationReason terminated_reason = TerminationReason::HorizonReached;
  std::int64_t integration_steps = 0;

  std::size_t size() const { return times.size(); }
  Vec state(std::size_t k) const;
  Vec control(std::size_t k) const;
  Vec disturbance(std::size_t k) const;
};

/// x + (f(x) + d + b(x) u) dt + g(x) dW. A non-finite result is returned as is
/// and the caller flags explosion.
Vec em_step(const SystemModel& model, const Vec& x, const Vec& u, const Vec& d, double dt,
            const Vec& dW);

/// Euler-Maruyama integration with first-grid-crossing event detection. Runs
/// until horizon, explosion, exit from D or policy infeasibility. Requires
/// x0 in D.
SamplePath simulate(const ModelFamily& family, double param0, const Policy& policy,
                    const DisturbanceGen& dist, const Vec& x0, const RasSpec& spec,
                    const SimConfig& cfg, CounterRng rng);

/// Same, with the stream derived from cfg.seed.
SamplePath simulate(const ModelFamily& family, double param0, const Policy& policy,
                    const DisturbanceGen& dist, const Vec& x0, const RasSpec& spec,
                    const SimConfig& cfg);

/// Fixed-model convenience overload.
SamplePath simulate(const SystemModel& model, const Policy& policy, const DisturbanceGen& dist,
                    const Vec& x0, const RasSpec& spec, const SimConfig& cfg);

}  // namespace stochras
