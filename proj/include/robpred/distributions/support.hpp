#pragma once

#include <robpred/core/types.hpp>

#include <utility>

namespace robpred::dist {

/// Axis-aligned box in the extended reals: lower(i) < upper(i), +-inf allowed.
class Support {
 public:
  Support(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require_dim(upper_.size(), lower_.size(), "Support bounds");
    if (lower_.size() < 1) throw DimensionError("Support: dimension must be >= 1");
    for (Index i = 0; i < lower_.size(); ++i) {
      if (std::isnan(lower_(i)) || std::isnan(upper_(i)) || !(lower_(i) < upper_(i))) {
        throw DomainError("Support: lower bound must be strictly below upper bound");
      }
      if (lower_(i) == kInf || upper_(i) == kNegInf) {
        throw DomainError("Support: bounds point the wrong way");
      }
    }
  }

  static Support unbounded(Index d) {
    return Support(Vector::Constant(d, kNegInf), Vector::Constant(d, kInf));
  }

  Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double lower(Index i) const { return lower_(i); }
  double upper(Index i) const { return upper_(i); }

  bool lower_bounded(Index i) const { return std::isfinite(lower_(i)); }
  bool upper_bounded(Index i) const { return std::isfinite(upper_(i)); }
  bool bounded(Index i) const { return lower_bounded(i) && upper_bounded(i); }

  bool all_bounded() const {
    for (Index i = 0; i < dim(); ++i)
      if (!bounded(i)) return false;
    return true;
  }

  /// Closed box membership.
  bool contains(const Vector& y) const {
    if (y.size() != dim()) return false;
    for (Index i = 0; i < dim(); ++i) {
      if (!(y(i) >= lower_(i) && y(i) <= upper_(i))) return false;
    }
    return true;
  }

  bool interior(const Vector& y) const {
    if (y.size() != dim()) return false;
    for (Index i = 0; i < dim(); ++i) {
      if (!(y(i) > lower_(i) && y(i) < upper_(i))) return false;
    }
    return true;
  }

 private:
  Vector lower_;
  Vector upper_;
};

}  // namespace robpred::dist
