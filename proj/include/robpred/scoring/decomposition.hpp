// Numerical check of the entropy/KL decomposition of the expected score
//   E_p log p_hat = -H(p) - KL(p || p_hat)
// for one-dimensional truths, using adaptive Gauss-Kronrod quadrature.
#pragma once

#include <robpred/distributions/predictive.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace robpred::scoring {

/// A one-dimensional true density, given by its log, with the integration
/// window center +- half_width.
struct TrueDensity1D {
  std::function<double(double)> log_pdf;
  double center = 0.0;
  double scale = 1.0;
  double half_width = 40.0;
  std::string label;
};

inline TrueDensity1D gaussian_truth(double mean, double var) {
  const double sd = std::sqrt(var);
  return {[mean, var](double s) {
            const double r = s - mean;
            return -0.5 * (std::log(2.0 * std::numbers::pi * var) + r * r / var);
          },
          mean, sd, 40.0 * sd, "normal"};
}

/// Integration window: 40 scales, widened to 1e3 scales for dof <= 5 and
/// 1e4 scales for dof <= 2.
inline TrueDensity1D student_t_truth(double dof, double location, double scale) {
  const double log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                          0.5 * std::log(dof * std::numbers::pi) - std::log(scale);
  const double width = dof <= 2.0 ? 1e4 : (dof <= 5.0 ? 1e3 : 40.0);
  return {[=](double s) {
            const double r = (s - location) / scale;
            return log_norm - 0.5 * (dof + 1.0) * std::log1p(r * r / dof);
          },
          location, scale, width * scale, "student_t"};
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive G7-K15 over consecutive segments of `breaks`. Throws
/// NumericalError when the summed error estimate exceeds abs_tol.
inline QuadratureResult integrate_segments(const std::function<double(double)>& f,
                                           const std::vector<double>& breaks, double abs_tol) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    out.value += Integrator::integrate(f, breaks[i], breaks[i + 1], 15, 1e-12, &err);
    out.error += err;
  }
  if (!std::isfinite(out.value) || out.error > abs_tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", out.error);
    throw NumericalError(std::string("quadrature did not reach the requested tolerance (error estimate ") + buf +
                         ")");
  }
  return out;
}

/// Breakpoints at center +- {0, 1, 4, 10, 40, ...} scales, geometric beyond.
inline std::vector<double> window_breaks(const TrueDensity1D& p) {
  std::vector<double> offsets{0.0, 1.0, 4.0, 10.0};
  for (double o = 40.0; o * p.scale < p.half_width; o *= 4.0) offsets.push_back(o);
  std::vector<double> breaks;
  const double edge = p.half_width;
  breaks.push_back(p.center - edge);
  for (auto it = offsets.rbegin(); it != offsets.rend(); ++it) {
    if (*it * p.scale < edge) breaks.push_back(p.center - *it * p.scale);
  }
  for (double o : offsets) {
    if (o > 0.0 && o * p.scale < edge) breaks.push_back(p.center + o * p.scale);
  }
  breaks.push_back(p.center + edge);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

/// Points where a 1-D predictor's log-density is not smooth.
inline std::vector<double> kinks(const dist::PredictiveDistribution& pred) {
  std::vector<double> out;
  std::visit(
      [&out](const auto& d) {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, dist::LaplacePred>) {
          out.push_back(d.location()(0));
        } else if constexpr (std::is_same_v<D, dist::UniformBox> || std::is_same_v<D, dist::ExponentialBox>) {
          if (std::isfinite(d.support().lower(0))) out.push_back(d.support().lower(0));
          if (std::isfinite(d.support().upper(0))) out.push_back(d.support().upper(0));
        }
      },
      pred);
  return out;
}

struct DecompositionCheck {
  double direct = 0.0;      ///< int p log p_hat
  double decomposed = 0.0;  ///< -H(p) - KL(p || p_hat)
  double entropy = 0.0;
  double kl = 0.0;
};

inline DecompositionCheck expected_ll_decomposition_check(const TrueDensity1D& truth,
                                                          const dist::PredictiveDistribution& pred,
                                                          double abs_tol = 1e-9) {
  if (dist::dim(pred) != 1) throw DimensionError("decomposition check is one-dimensional");
  bool hits_neg_inf = false;
  Vector point(1);
  auto log_pred = [&](double s) {
    point(0) = s;
    return dist::log_density(pred, point);
  };
  auto breaks = window_breaks(truth);
  for (double k : kinks(pred)) {
    if (k > breaks.front() && k < breaks.back()) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto direct_integrand = [&](double s) {
    const double lp = truth.log_pdf(s);
    const double p = std::exp(lp);
    if (p == 0.0) return 0.0;
    const double lq = log_pred(s);
    if (lq == kNegInf) {
      hits_neg_inf = true;
      return 0.0;
    }
    return p * lq;
  };
  auto entropy_integrand = [&](double s) {
    const double lp = truth.log_pdf(s);
    const double p = std::exp(lp);
    return p == 0.0 ? 0.0 : -p * lp;
  };
  auto kl_integrand = [&](double s) {
    const double lp = truth.log_pdf(s);
    const double p = std::exp(lp);
    if (p == 0.0) return 0.0;
    const double lq = log_pred(s);
    if (lq == kNegInf) {
      hits_neg_inf = true;
      return 0.0;
    }
    return p * (lp - lq);
  };

  DecompositionCheck out;
  out.direct = integrate_segments(direct_integrand, breaks, abs_tol).value;
  out.entropy = integrate_segments(entropy_integrand, breaks, abs_tol).value;
  out.kl = integrate_segments(kl_integrand, breaks, abs_tol).value;
  if (hits_neg_inf) {
    out.direct = kNegInf;
    out.kl = kInf;
  }
  out.decomposed = out.kl == kInf ? kNegInf : -out.entropy - out.kl;
  return out;
}

}  // namespace robpred::scoring
