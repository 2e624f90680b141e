#pragma once

#include <robpred/core/types.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace robpred::oracle {

struct GridResult {
  std::vector<double> point;
  double value = kNegInf;
  std::uint64_t evaluations = 0;
};

/// Exhaustive evaluation on lower + i*resolution (upper included when it
/// lies on the lattice). Ties keep the first point in lexicographic order.
inline GridResult grid_argmax(const std::function<double(const std::vector<double>&)>& objective,
                              const std::vector<double>& lower, const std::vector<double>& upper,
                              double resolution) {
  if (lower.size() != upper.size() || lower.empty()) throw DimensionError("grid_argmax: bad box");
  if (!(resolution > 0.0)) throw DomainError("grid_argmax: resolution must be positive");
  const std::size_t d = lower.size();
  std::vector<long> counts(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(lower[i] <= upper[i])) throw DomainError("grid_argmax: lower > upper");
    counts[i] = static_cast<long>(std::floor((upper[i] - lower[i]) / resolution + 1e-9)) + 1;
  }
  GridResult best;
  std::vector<long> idx(d, 0);
  std::vector<double> x(d);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = lower[i] + static_cast<double>(idx[i]) * resolution;
    const double v = objective(x);
    ++best.evaluations;
    if (v > best.value || best.point.empty()) {
      best.value = v;
      best.point = x;
    }
    std::size_t j = d;
    while (j > 0) {
      --j;
      if (++idx[j] < counts[j]) break;
      idx[j] = 0;
      if (j == 0) return best;
    }
  }
}

/// Plain bisection. Requires a sign change on [lo, hi]; stops when
/// |f(root)| < f_tol or the bracket cannot shrink further.
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                          double f_tol = 1e-12) {
  if (!(lo < hi)) throw DomainError("bisect_root: empty bracket");
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) throw DomainError("bisect_root: no sign change on bracket");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 2000; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::abs(fm) < f_tol || mid <= lo || mid >= hi) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return mid;
}

}  // namespace robpred::oracle
