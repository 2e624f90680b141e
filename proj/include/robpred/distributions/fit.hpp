// Optimal moment-based fits:
//   order 0 -> uniform on a bounded support
//   order 1 -> truncated exponential per dimension (needs a half-bounded support)
//   order 2 -> Gaussian with the given mean and covariance
// plus the two non-polynomial families (Laplace, multivariate t).
#pragma once

#include <robpred/distributions/predictive.hpp>

#include <cmath>
#include <string>

namespace robpred::dist {

inline PredictiveDistribution fit_order0(const Support& support) {
  for (Index i = 0; i < support.dim(); ++i) {
    if (!support.bounded(i)) {
      throw NoRobustPredictor("fit_order0: dimension " + std::to_string(i) +
                              " of the support is unbounded");
    }
  }
  return UniformBox(support);
}

namespace detail {

/// Stationarity equation of the bounded first-order fit in support-normalized
/// coordinates (lower = 0, upper = 1, mean u in (0, 1)):
///   J(x) = ((1 - u) x - 1) e^x + u x + 1.
/// J has a double zero at x = 0; the optimum is its other root.
inline double order1_equation_normalized(double u, double x) {
  if (std::abs(x) < 0.5) {
    // sum_{n>=2} ((1-u)/(n-1)! - 1/n!) x^n
    double acc = 0.0;
    double pow_x = x * x;
    double inv_fact_nm1 = 1.0;  // 1/(n-1)! for n = 2
    for (int n = 2; n < 40; ++n) {
      const double inv_fact_n = inv_fact_nm1 / n;
      acc += ((1.0 - u) * inv_fact_nm1 - inv_fact_n) * pow_x;
      pow_x *= x;
      inv_fact_nm1 = inv_fact_n;
    }
    return acc;
  }
  return ((1.0 - u) * x - 1.0) * std::exp(x) + u * x + 1.0;
}

/// J(x) / x^2, finite at zero with value 1/2 - u.
inline double order1_reduced(double u, double x) {
  if (x == 0.0) return 0.5 - u;
  return order1_equation_normalized(u, x) / (x * x);
}

/// Non-zero root of the normalized equation for u < 1/2 (the root is negative).
/// Expands the bracket geometrically outward from -1e-6, then bisects.
inline double order1_root_below_half(double u) {
  double hi = 0.0;  // reduced function is positive here
  double lo = -1e-6;
  while (order1_reduced(u, lo) >= 0.0) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e18) throw NumericalError("fit_order1: no sign change found for the root bracket");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double j = order1_equation_normalized(u, mid);
    if (j == 0.0) break;
    if (order1_reduced(u, mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

/// log( lambda / (e^{b lambda} - e^{a lambda}) ), the normalizer of the
/// truncated exponential on [a, b], evaluated without overflow.
inline double order1_bounded_lambda0(double a, double b, double lambda) {
  const double w = b - a;
  if (lambda == 0.0) return -std::log(w);
  if (lambda < 0.0) return std::log(-lambda) - a * lambda - std::log(-std::expm1(w * lambda));
  return std::log(lambda) - b * lambda - std::log(-std::expm1(-w * lambda));
}

inline bool is_midpoint(double u) { return std::abs(u - 0.5) <= 1e-12; }

}  // namespace detail

/// The root equation in raw coordinates:
///   [(upper - z) x - 1] e^{(upper - lower) x} - (lower - z) x + 1.
inline double order1_root_equation(double lower, double upper, double z, double x) {
  const double w = upper - lower;
  return detail::order1_equation_normalized((z - lower) / w, x * w);
}

inline PredictiveDistribution fit_order1(const Support& support, const Vector& z) {
  require_dim(z.size(), support.dim(), "fit_order1 mean");
  const Index d = support.dim();
  Vector lambda1(d);
  Vector lambda0(d);
  bool all_midpoint = true;
  for (Index i = 0; i < d; ++i) {
    const double a = support.lower(i);
    const double b = support.upper(i);
    if (!support.lower_bounded(i) && !support.upper_bounded(i)) {
      throw NoRobustPredictor("fit_order1: dimension " + std::to_string(i) +
                              " is unbounded on both sides");
    }
    if (!(z(i) > a && z(i) < b)) {
      throw DomainError("fit_order1: mean must lie strictly inside the support");
    }
    if (!support.upper_bounded(i)) {
      lambda1(i) = 1.0 / (a - z(i));
      lambda0(i) = -std::log(z(i) - a) + a / (z(i) - a);
      all_midpoint = false;
    } else if (!support.lower_bounded(i)) {
      lambda1(i) = 1.0 / (b - z(i));
      lambda0(i) = -std::log(b - z(i)) + b / (z(i) - b);
      all_midpoint = false;
    } else {
      const double w = b - a;
      const double u = (z(i) - a) / w;
      double root = 0.0;
      if (!detail::is_midpoint(u)) {
        // Reflection s -> -s maps u to 1 - u and flips the root's sign.
        root = u < 0.5 ? detail::order1_root_below_half(u) : -detail::order1_root_below_half(1.0 - u);
        all_midpoint = false;
      }
      lambda1(i) = root / w;
      lambda0(i) = detail::order1_bounded_lambda0(a, b, lambda1(i));
    }
  }
  if (all_midpoint) return UniformBox(support);
  return ExponentialBox(support, std::move(lambda1), std::move(lambda0));
}

/// Gaussian fit. Asymmetry above 1e-9 is rejected; a singular covariance is
/// regularized with 1e-9 * trace/d on the diagonal and the amount recorded.
inline PredictiveDistribution fit_order2(const Vector& z, const Matrix& sigma) {
  require_dim(sigma.rows(), z.size(), "fit_order2 covariance rows");
  require_dim(sigma.cols(), z.size(), "fit_order2 covariance cols");
  if (asymmetry(sigma) > 1e-9) throw DomainError("fit_order2: covariance is not symmetric");
  const Matrix sym = symmetrize(sigma);
  const SpdFactor f = factor_spd_with_jitter(sym, 1e-9, "fit_order2 covariance");
  if (f.jitter == 0.0) return GaussianPred(z, sym);
  Matrix reg = sym;
  reg.diagonal().array() += f.jitter;
  return GaussianPred(z, reg, f.jitter);
}

inline PredictiveDistribution fit_laplace(const Vector& location, const Vector& scale) {
  return LaplacePred(location, scale);
}

inline PredictiveDistribution fit_student_t(double dof, const Vector& location, const Matrix& scale) {
  return StudentTPred(dof, location, scale);
}

}  // namespace robpred::dist
