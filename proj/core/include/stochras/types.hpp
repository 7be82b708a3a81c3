#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stochras {

/// Largest state / noise / control dimension the toolkit handles. Vectors are
/// stack-allocated up to this size.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxDim, kMaxDim>;

/// Builds a Vec from an initializer list, e.g. `vec({0.5, 0.6})`.
inline Vec vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

/// Base for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared while evaluating a model or field.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration (empty grid, bad dimensions, bad bounds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was asked for something its inputs do not support.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition did not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine (root finder, factorization) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// State outside the model's physical domain (e.g. negative pressure rise).
class DomainError : public Error {
 public:
  using Error::Error;
};

void check_dim(Eigen::Index n, const char* what);

}  // namespace stochras
