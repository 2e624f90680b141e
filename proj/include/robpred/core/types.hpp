// Common value types, error hierarchy and extended-real helpers.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace robpred {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// log of the smallest positive (subnormal) double. A density whose log lies
/// below this value rounds to zero in double precision.
inline const double kLogSmallestDensity =
    std::log(std::numeric_limits<double>::denorm_min());

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix/vector sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// No robust predictor of the requested order exists for the given support.
class NoRobustPredictor : public Error {
 public:
  using Error::Error;
};

/// Factorization or iteration that failed numerically.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Addition on [-inf, +inf) where -inf absorbs everything, NaN included.
inline double saturating_add(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || a == kNegInf || b == kNegInf) {
    return kNegInf;
  }
  return a + b;
}

inline void require_dim(Index actual, Index expected, const std::string& what) {
  if (actual != expected) {
    throw DimensionError(what + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace robpred
