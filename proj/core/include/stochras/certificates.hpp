#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stochras/qp.hpp"
#include "stochras/region.hpp"
#include "stochras/sde_core.hpp"

namespace stochras {

/// Reciprocal barrier B together with the function h it is built from.
/// Target-anchored barriers use |x|_A as the class-K argument; boundary
/// barriers (the relaxed form for smooth unsafe boundaries) use h(x).
struct BarrierEntry {
  enum class Anchor { Target, Boundary };

  std::string name;
  ScalarField2 B;
  ScalarField2 h;
  std::optional<ClassK> atilde1;  ///< sandwich bounds; checked only when both are given
  std::optional<ClassK> atilde2;
  ClassK atilde3 = ClassK::linear(0.1);
  Anchor anchor = Anchor::Boundary;
};

struct CertificateSet {
  ScalarField2 V;
  Region target_A = Region::point(Vec::Zero(1));
  ClassK alpha1 = ClassK::power(1.0, 2.0);
  ClassK alpha2 = ClassK::power(1.0, 2.0);
  ClassK alpha3 = ClassK::linear(1.0);
  std::vector<BarrierEntry> barriers;
  Region G = Region::ball(Vec::Zero(1), 1.0);  ///< ball B_r(A)
  double R_outer = 1.0;

  /// 0 < r <= R_outer and G is a ball.
  void validate() const;
};

/// Grid over a box (per-axis bounds and counts) or an annulus around a center
/// (radial x angular counts; in 1-D the "angles" are the two directions).
struct GridSpec {
  struct Box {
    Vec lo;
    Vec hi;
    std::vector<int> counts;
  };
  struct Annulus {
    Vec center;
    double r_inner;
    double r_outer;
    int radial;
    int angular;
  };
  std::variant<Box, Annulus> shape;

  /// Grid points in a fixed deterministic order. Throws ConfigError("empty grid").
  std::vector<Vec> points() const;
  /// Largest spacing between neighbouring grid points.
  double resolution() const;
};

struct CheckOptions {
  double tolerance = 1e-9;
  /// When set, the pass condition tightens to
  /// worst_margin >= lipschitz * grid_resolution * sqrt(n).
  std::optional<double> lipschitz;
};

struct CheckReport {
  std::string name;
  bool passed = false;
  double worst_margin = 0.0;
  Vec worst_point;
  std::string worst_condition;
  std::size_t samples_checked = 0;
  std::size_t samples_skipped = 0;  ///< grid points outside the certifiable region
  double grid_resolution = 0.0;
  double required_margin = 0.0;
};

/// Minimum over the grid of V - a1(|x|_A), a2(|x|_A) - V and
/// -a3(|x|_A) - sup_d L_d V(x). Points with |x|_A = 0 are skipped.
CheckReport check_slf(const SystemModel& model, const CertificateSet& certs, const GridSpec& grid,
                      const CheckOptions& opts = {});

/// Minimum over grid points inside G of a~3(arg) - sup_d L_d B(x), plus the
/// sandwich 1/a~1(arg) <= B <= 1/a~2(arg) when both are supplied (otherwise
/// only B > 0). Throws PreconditionError listing points inside G where h <= 0.
CheckReport check_reciprocal_barrier(const SystemModel& model, const CertificateSet& certs,
                                     const BarrierEntry& barrier, const GridSpec& grid,
                                     const CheckOptions& opts = {});

/// max(0, 1 - sup_{x in X0} V(x) / a1(r)) with r the radius of G. X0 samples
/// are the supplied points plus boundary samples when X0 is a ball. Throws
/// PreconditionError when a sample lies outside G.
double probability_bound(const CertificateSet& certs, const Region& X0,
                         std::span<const Vec> x0_samples);

/// Per-coordinate box for the control input.
struct InputBox {
  Vec lo;
  Vec hi;
};

/// At every grid point, min over u in the box of sup_d L^u_d V(x) + a3(|x|_A);
/// the report's margin is the negated worst minimum (passes iff every minimum
/// is <= 0). Feasibility at each point is also decided by a min-norm QP, so a
/// QP disagreement surfaces as NumericalError with the point coordinates.
CheckReport check_control_feasibility(const SystemModel& model, const CertificateSet& certs,
                                      const GridSpec& grid, const InputBox& box,
                                      const CheckOptions& opts = {});

/// Re-evaluates the slack named by `condition` at x (used to reproduce a
/// report's worst_margin).
double evaluate_slf_slack(const SystemModel& model, const CertificateSet& certs,
                          const std::string& condition, const Vec& x);

}  // namespace stochras
