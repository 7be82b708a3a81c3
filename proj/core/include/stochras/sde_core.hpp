#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stochras/types.hpp"

namespace stochras {

/// Perturbed controlled SDE
///   dX = f(X) dt + xi(t) dt + b(X) u dt + g(X) dW,   |xi(t)| <= delta.
/// All maps are pure; a model is immutable once built.
struct SystemModel {
  int n = 0;  ///< state dimension
  int m = 0;  ///< Wiener dimension
  int p = 0;  ///< control dimension
  std::function<Vec(const Vec&)> drift;           ///< f: R^n -> R^n
  std::function<Mat(const Vec&)> control_matrix;  ///< b: R^n -> R^{n x p}; may be empty when p == 0
  std::function<Mat(const Vec&)> diffusion;       ///< g: R^n -> R^{n x m}
  double delta = 0.0;                             ///< disturbance bound

  /// Throws ConfigError on inconsistent dimensions or negative delta.
  void validate() const;

  Mat b(const Vec& x) const;
};

/// Twice-differentiable scalar field with analytic derivatives.
struct ScalarField2 {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  static ScalarField2 constant(int n, double c);
  /// x -> (x - c)^T Q (x - c) for symmetric Q.
  static ScalarField2 quadratic(const Mat& Q, const Vec& center);

  /// a*f + b*g, with derivatives combined linearly.
  static ScalarField2 linear_combination(double a, const ScalarField2& f, double b,
                                         const ScalarField2& g);
};

/// Result of comparing analytic derivatives against central differences.
struct DerivativeCheck {
  bool passed = true;
  double worst_gradient_error = 0.0;
  double worst_hessian_asymmetry = 0.0;
  Vec worst_point;
  std::size_t points_checked = 0;
};

/// Load-time self check of a field's gradient (central differences of the
/// value) and Hessian (symmetry to 1e-12, central differences of the gradient).
/// Gradient tolerance per point is max(1e-5, 1e-3 |grad|).
DerivativeCheck check_field_derivatives(const ScalarField2& field, std::span<const Vec> points,
                                        double step = 1e-6);

/// Class-K function: continuous, strictly increasing, zero at zero.
class ClassK {
 public:
  struct Power {
    double coeff;
    double exponent;
  };
  struct Linear {
    double coeff;
  };
  struct Custom {
    std::function<double(double)> eval;
    std::function<double(double)> inverse;
  };

  static ClassK power(double coeff, double exponent);
  static ClassK linear(double coeff);
  static ClassK custom(std::function<double(double)> eval, std::function<double(double)> inverse);

  double operator()(double s) const;
  double inverse(double y) const;

  /// Human-readable description, e.g. "4*s^2".
  std::string describe() const;

  const std::variant<Power, Linear, Custom>& form() const { return form_; }

 private:
  explicit ClassK(std::variant<Power, Linear, Custom> form) : form_(std::move(form)) {}
  std::variant<Power, Linear, Custom> form_;
};

/// L_d h(x) = grad h(x) . (f(x) + d) + 1/2 Tr[g g^T(x) h_xx(x)].
/// Requires |d| <= delta + 1e-12. Throws EvaluationError naming the
/// non-finite term.
double generator_apply(const SystemModel& model, const Vec& d, const Vec& x,
                       const ScalarField2& field);

/// sup over |d| <= delta of L_d h(x), plus grad h . control_term when given.
/// The generator is affine in d, so the sup is delta |grad h(x)|.
double worst_case_generator(const SystemModel& model, const Vec& x, const ScalarField2& field,
                            const std::optional<Vec>& control_term = std::nullopt);

/// 1/2 Tr[g g^T(x) H] without forming g g^T explicitly.
double diffusion_trace(const Mat& g, const Mat& hessian);

/// Smallest eigenvalue of g g^T over sample points, reported for the uniform
/// ellipticity assumption. Not enforced anywhere.
struct EllipticityReport {
  double min_eigenvalue = 0.0;
  Vec argmin;
  bool uniformly_elliptic = false;
};
EllipticityReport check_ellipticity(const SystemModel& model, std::span<const Vec> points);

}  // namespace stochras
