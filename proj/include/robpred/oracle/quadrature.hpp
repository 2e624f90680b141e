// Brute-force verifiers for the test surface. Nothing in the production
// headers includes this directory.
#pragma once

#include <robpred/distributions/predictive.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace robpred::oracle {

struct QuadratureSpec {
  std::vector<std::pair<double, double>> domain;  ///< disjoint intervals, summed
  double abs_tol = 1e-10;
  int max_refinements = 60;

  /// [center - half_width, center + half_width] cut at center +- 2^j so that
  /// polynomial tails are resolved segment by segment.
  static QuadratureSpec around(double center, double half_width, double abs_tol = 1e-10) {
    QuadratureSpec spec;
    spec.abs_tol = abs_tol;
    std::vector<double> cuts{0.0};
    for (double r = 1.0; r < half_width; r *= 2.0) cuts.push_back(r);
    cuts.push_back(half_width);
    for (std::size_t i = cuts.size() - 1; i > 0; --i) {
      spec.domain.emplace_back(center - cuts[i], center - cuts[i - 1]);
    }
    for (std::size_t i = 1; i < cuts.size(); ++i) {
      spec.domain.emplace_back(center + cuts[i - 1], center + cuts[i]);
    }
    return spec;
  }

  void validate() const {
    if (!(abs_tol > 0.0)) throw DomainError("QuadratureSpec: abs_tol must be positive");
    if (domain.empty()) throw DomainError("QuadratureSpec: empty domain");
    for (const auto& [a, b] : domain) {
      if (!(a < b)) throw DomainError("QuadratureSpec: interval with lower >= upper");
    }
  }
};

namespace detail {

struct SimpsonCtx {
  const std::function<double(double)>& f;
  int max_depth;
  bool failed = false;
};

inline double simpson_recurse(SimpsonCtx& ctx, double a, double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = ctx.f(lm);
  const double frm = ctx.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) {
    ctx.failed = true;
    return left + right;
  }
  // Below this the Simpson difference is round-off, not truncation error.
  const double noise = 1e-14 * (std::abs(left) + std::abs(right));
  if (std::abs(delta) <= std::max(15.0 * tol, noise)) return left + right + delta / 15.0;
  if (depth >= ctx.max_depth) {
    ctx.failed = true;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(ctx, a, m, fa, flm, fm, left, tol / 2.0, depth + 1) +
         simpson_recurse(ctx, m, b, fm, frm, fb, right, tol / 2.0, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction. The tolerance budget is split
/// across intervals by length fraction.
inline double adaptive_simpson(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  spec.validate();
  double total_len = 0.0;
  for (const auto& [a, b] : spec.domain) total_len += b - a;
  double sum = 0.0;
  for (const auto& [a, b] : spec.domain) {
    detail::SimpsonCtx ctx{f, spec.max_refinements};
    const double fa = f(a), fb = f(b);
    // Start from a few forced splits so narrow peaks are not missed.
    const int pieces = 16;
    const double h = (b - a) / pieces;
    const double tol = spec.abs_tol * (b - a) / total_len / pieces;
    for (int i = 0; i < pieces; ++i) {
      const double lo = a + i * h;
      const double hi = (i + 1 == pieces) ? b : lo + h;
      const double flo = i == 0 ? fa : f(lo);
      const double fhi = i + 1 == pieces ? fb : f(hi);
      const double fmid = f(0.5 * (lo + hi));
      const double w = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
      sum += detail::simpson_recurse(ctx, lo, hi, flo, fmid, fhi, w, tol, 0);
    }
    if (ctx.failed) {
      throw NumericalError("adaptive_simpson: tolerance not reached on [" + std::to_string(a) + ", " +
                           std::to_string(b) + "]");
    }
  }
  return sum;
}

/// One-step expected score  int p(s) log p_hat(s) ds  for a 1-D predictor.
/// Points where p vanishes contribute 0 even if log p_hat is -inf there.
inline double quad_expected_score(const std::function<double(double)>& true_density,
                                  const dist::PredictiveDistribution& pred, const QuadratureSpec& spec) {
  if (dist::dim(pred) != 1) throw DimensionError("quad_expected_score: predictor must be 1-D");
  const double mass = adaptive_simpson(true_density, spec);
  if (std::abs(mass - 1.0) > 1e-8) {
    throw DomainError("quad_expected_score: true density mass " + std::to_string(mass) + " != 1");
  }
  Vector y(1);
  const std::function<double(double)> integrand = [&](double s) {
    const double p = true_density(s);
    if (p == 0.0) return 0.0;
    y(0) = s;
    const double lp = dist::log_density(pred, y);
    return p * lp;
  };
  return adaptive_simpson(integrand, spec);
}

}  // namespace robpred::oracle
