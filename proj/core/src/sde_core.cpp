#include "stochras/sde_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stochras {

void check_dim(Eigen::Index n, const char* what) {
  if (n < 0 || n > kMaxDim) {
    std::ostringstream os;
    os << what << " dimension " << n << " exceeds the supported maximum " << kMaxDim;
    throw ConfigError(os.str());
  }
}

void SystemModel::validate() const {
  check_dim(n, "state");
  check_dim(m, "Wiener");
  check_dim(p, "control");
  if (n < 1) throw ConfigError("state dimension must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta must be finite and >= 0");
  if (!drift) throw ConfigError("model has no drift");
  if (m > 0 && !diffusion) throw ConfigError("model has Wiener dimension but no diffusion");
  if (p > 0 && !control_matrix) throw ConfigError("model has control dimension but no control matrix");
}

Mat SystemModel::b(const Vec& x) const {
  if (p == 0 || !control_matrix) return Mat::Zero(n, 0);
  return control_matrix(x);
}

ScalarField2 ScalarField2::constant(int n, double c) {
  return {[c](const Vec&) { return c; }, [n](const Vec&) { return Vec(Vec::Zero(n)); },
          [n](const Vec&) { return Mat(Mat::Zero(n, n)); }};
}

ScalarField2 ScalarField2::quadratic(const Mat& Q, const Vec& center) {
  Mat sym = 0.5 * (Q + Q.transpose());
  return {[sym, center](const Vec& x) {
            Vec e = x - center;
            return e.dot(sym * e);
          },
          [sym, center](const Vec& x) { return Vec(2.0 * sym * (x - center)); },
          [sym](const Vec&) { return Mat(2.0 * sym); }};
}

ScalarField2 ScalarField2::linear_combination(double a, const ScalarField2& f, double b,
                                              const ScalarField2& g) {
  return {[=](const Vec& x) { return a * f.value(x) + b * g.value(x); },
          [=](const Vec& x) { return Vec(a * f.gradient(x) + b * g.gradient(x)); },
          [=](const Vec& x) { return Mat(a * f.hessian(x) + b * g.hessian(x)); }};
}

DerivativeCheck check_field_derivatives(const ScalarField2& field, std::span<const Vec> points,
                                        double step) {
  DerivativeCheck out;
  double worst_ratio = 0.0;
  for (const Vec& x : points) {
    const Eigen::Index n = x.size();
    Vec grad = field.gradient(x);
    Mat hess = field.hessian(x);
    Vec fd(n);
    Mat fd_hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec xp = x, xm = x;
      xp(i) += step;
      xm(i) -= step;
      fd(i) = (field.value(xp) - field.value(xm)) / (2.0 * step);
      fd_hess.col(i) = (field.gradient(xp) - field.gradient(xm)) / (2.0 * step);
    }
    const double tol = std::max(1e-5, 1e-3 * grad.norm());
    const double err = (grad - fd).cwiseAbs().maxCoeff();
    const double hess_tol = std::max(1e-5, 1e-3 * hess.cwiseAbs().maxCoeff());
    const double hess_err = (hess - fd_hess).cwiseAbs().maxCoeff();
    const double asym = (hess - hess.transpose()).cwiseAbs().maxCoeff();
    const double ratio = std::max(err / tol, hess_err / hess_tol);
    if (ratio > worst_ratio || out.worst_point.size() == 0) {
      worst_ratio = std::max(worst_ratio, ratio);
      out.worst_point = x;
    }
    out.worst_gradient_error = std::max(out.worst_gradient_error, err);
    out.worst_hessian_asymmetry = std::max(out.worst_hessian_asymmetry, asym);
    if (err > tol || hess_err > hess_tol || asym > 1e-12 || !std::isfinite(err)) out.passed = false;
    ++out.points_checked;
  }
  return out;
}

ClassK ClassK::power(double coeff, double exponent) {
  if (!(coeff > 0.0) || !(exponent > 0.0)) throw ConfigError("class-K power needs c > 0, q > 0");
  return ClassK(Power{coeff, exponent});
}

ClassK ClassK::linear(double coeff) {
  if (!(coeff > 0.0)) throw ConfigError("class-K linear needs c > 0");
  return ClassK(Linear{coeff});
}

ClassK ClassK::custom(std::function<double(double)> eval, std::function<double(double)> inverse) {
  if (!eval || !inverse) throw ConfigError("custom class-K needs eval and inverse");
  return ClassK(Custom{std::move(eval), std::move(inverse)});
}

double ClassK::operator()(double s) const {
  return std::visit(
      [s](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return f.coeff * std::pow(s, f.exponent);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return f.coeff * s;
        } else {
          return f.eval(s);
        }
      },
      form_);
}

double ClassK::inverse(double y) const {
  return std::visit(
      [y](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          return std::pow(y / f.coeff, 1.0 / f.exponent);
        } else if constexpr (std::is_same_v<T, Linear>) {
          return y / f.coeff;
        } else {
          return f.inverse(y);
        }
      },
      form_);
}

std::string ClassK::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&os](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Power>) {
          os << f.coeff << "*s^" << f.exponent;
        } else if constexpr (std::is_same_v<T, Linear>) {
          os << f.coeff << "*s";
        } else {
          os << "custom";
        }
      },
      form_);
  return os.str();
}

double diffusion_trace(const Mat& g, const Mat& hessian) {
  // Tr[g g^T H] = sum_k g_k^T H g_k over Wiener columns.
  double tr = 0.0;
  for (Eigen::Index k = 0; k < g.cols(); ++k) tr += g.col(k).dot(hessian * g.col(k));
  return 0.5 * tr;
}

namespace {

void require_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw EvaluationError(std::string("non-finite value in generator term: ") + term);
  }
}

double generator_terms(const SystemModel& model, const Vec& x, const ScalarField2& field,
                       Vec* grad_out) {
  Vec grad = field.gradient(x);
  require_finite(grad.norm(), "gradient");
  Vec f = model.drift(x);
  require_finite(f.norm(), "drift");
  double drift_term = grad.dot(f);
  require_finite(drift_term, "gradient . drift");
  double trace_term = 0.0;
  if (model.m > 0) {
    Mat g = model.diffusion(x);
    Mat h = field.hessian(x);
    trace_term = diffusion_trace(g, h);
    require_finite(trace_term, "diffusion trace");
  }
  if (grad_out != nullptr) *grad_out = grad;
  return drift_term + trace_term;
}

}  // namespace

double generator_apply(const SystemModel& model, const Vec& d, const Vec& x,
                       const ScalarField2& field) {
  if (d.norm() > model.delta + 1e-12) {
    throw PreconditionError("disturbance outside the delta ball");
  }
  Vec grad;
  double base = generator_terms(model, x, field, &grad);
  double dist = grad.dot(d);
  require_finite(dist, "gradient . disturbance");
  return base + dist;
}

double worst_case_generator(const SystemModel& model, const Vec& x, const ScalarField2& field,
                            const std::optional<Vec>& control_term) {
  Vec grad;
  double value = generator_terms(model, x, field, &grad);
  if (control_term) {
    double c = grad.dot(*control_term);
    require_finite(c, "gradient . control");
    value += c;
  }
  value += model.delta * grad.norm();
  require_finite(value, "worst-case sum");
  return value;
}

EllipticityReport check_ellipticity(const SystemModel& model, std::span<const Vec> points) {
  EllipticityReport out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const Vec& x : points) {
    Mat g = model.m > 0 ? model.diffusion(x) : Mat::Zero(model.n, 0);
    Mat ggt = g * g.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(ggt, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    if (lo < out.min_eigenvalue) {
      out.min_eigenvalue = lo;
      out.argmin = x;
    }
  }
  out.uniformly_elliptic = out.min_eigenvalue > 0.0;
  return out;
}

}  // namespace stochras
