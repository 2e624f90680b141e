// One-step predictive distributions. Every family exposes log_density (a
// total function into [-inf, +inf) that never returns NaN) and sample.
#pragma once

#include <robpred/core/linalg.hpp>
#include <robpred/core/rng.hpp>
#include <robpred/distributions/support.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace robpred::dist {

namespace detail {

inline double log_2pi() { return std::log(2.0 * std::numbers::pi); }

/// log(1 + s^2 / nu) without forming s^2 when it would overflow.
inline double log1p_square_over(double s, double nu) {
  if (!std::isfinite(s)) return kInf;
  if (s < 1e150) return std::log1p(s * s / nu);
  return 2.0 * std::log(s) - std::log(nu) + std::log1p(nu / s / s);
}

}  // namespace detail

class UniformBox {
 public:
  explicit UniformBox(Support support) : support_(std::move(support)) {
    if (!support_.all_bounded()) {
      throw NoRobustPredictor("UniformBox: support must be bounded in every dimension");
    }
    log_volume_ = 0.0;
    for (Index i = 0; i < support_.dim(); ++i) log_volume_ += std::log(support_.upper(i) - support_.lower(i));
  }

  Index dim() const { return support_.dim(); }
  const Support& support() const { return support_; }

  double log_density(const Vector& y) const {
    return support_.contains(y) ? -log_volume_ : kNegInf;
  }

  Vector sample(RandomStream& rng) const {
    Vector s(dim());
    for (Index i = 0; i < dim(); ++i) {
      s(i) = support_.lower(i) + (support_.upper(i) - support_.lower(i)) * rng.uniform_open();
    }
    return s;
  }

  std::vector<double> parameters() const {
    std::vector<double> p;
    for (Index i = 0; i < dim(); ++i) {
      p.push_back(support_.lower(i));
      p.push_back(support_.upper(i));
    }
    return p;
  }

 private:
  Support support_;
  double log_volume_ = 0.0;
};

/// Product density prod_i exp(lambda1_i s_i + lambda0_i) on the support.
class ExponentialBox {
 public:
  ExponentialBox(Support support, Vector lambda1, Vector lambda0)
      : support_(std::move(support)), lambda1_(std::move(lambda1)), lambda0_(std::move(lambda0)) {
    require_dim(lambda1_.size(), support_.dim(), "ExponentialBox lambda1");
    require_dim(lambda0_.size(), support_.dim(), "ExponentialBox lambda0");
    for (Index i = 0; i < dim(); ++i) {
      const double l = lambda1_(i);
      const bool ok = support_.bounded(i) ||
                      (support_.lower_bounded(i) && l < 0.0) ||
                      (support_.upper_bounded(i) && l > 0.0);
      if (!ok || !std::isfinite(l) || !std::isfinite(lambda0_(i))) {
        throw DomainError("ExponentialBox: parameters do not define a density on the support");
      }
    }
  }

  Index dim() const { return support_.dim(); }
  const Support& support() const { return support_; }
  const Vector& lambda1() const { return lambda1_; }
  const Vector& lambda0() const { return lambda0_; }

  double log_density(const Vector& y) const {
    if (!support_.contains(y)) return kNegInf;
    double acc = 0.0;
    for (Index i = 0; i < dim(); ++i) acc += lambda1_(i) * y(i) + lambda0_(i);
    return std::isnan(acc) ? kNegInf : acc;
  }

  /// Inverse-CDF draw, per dimension.
  Vector sample(RandomStream& rng) const {
    Vector s(dim());
    for (Index i = 0; i < dim(); ++i) {
      const double a = support_.lower(i);
      const double b = support_.upper(i);
      const double l = lambda1_(i);
      const double u = rng.uniform_open();
      if (!support_.upper_bounded(i)) {
        s(i) = a + std::log(u) / l;
      } else if (!support_.lower_bounded(i)) {
        s(i) = b + std::log(u) / l;
      } else if (l == 0.0) {
        s(i) = a + (b - a) * u;
      } else if (l < 0.0) {
        s(i) = a + std::log1p(u * std::expm1(l * (b - a))) / l;
      } else {
        s(i) = b - std::log1p(u * std::expm1(-l * (b - a))) / (-l);
      }
    }
    return s;
  }

  std::vector<double> parameters() const {
    std::vector<double> p;
    for (Index i = 0; i < dim(); ++i) {
      p.insert(p.end(), {support_.lower(i), support_.upper(i), lambda1_(i), lambda0_(i)});
    }
    return p;
  }

 private:
  Support support_;
  Vector lambda1_;
  Vector lambda0_;
};

class GaussianPred {
 public:
  GaussianPred(Vector mean, Matrix cov, double jitter = 0.0)
      : mean_(std::move(mean)), cov_(std::move(cov)), jitter_(jitter) {
    require_dim(cov_.rows(), mean_.size(), "GaussianPred covariance");
    factor_ = factor_spd(cov_, "GaussianPred covariance");
  }

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  /// Diagonal regularization applied when the moment covariance was singular.
  double jitter() const { return jitter_; }

  double log_density(const Vector& y) const {
    if (y.size() != dim() || !y.allFinite()) return kNegInf;
    const double q = factor_.whiten(y - mean_).squaredNorm();
    if (!std::isfinite(q)) return kNegInf;
    const double out = -0.5 * (static_cast<double>(dim()) * detail::log_2pi() + factor_.log_det() + q);
    return std::isnan(out) ? kNegInf : out;
  }

  Vector sample(RandomStream& rng) const {
    return mean_ + factor_.lower() * rng.normal_vector(dim());
  }

  std::vector<double> parameters() const {
    std::vector<double> p(mean_.data(), mean_.data() + mean_.size());
    p.insert(p.end(), cov_.data(), cov_.data() + cov_.size());
    return p;
  }

 private:
  Vector mean_;
  Matrix cov_;
  double jitter_ = 0.0;
  SpdFactor factor_;
};

/// Independent components with density (2 b_i)^-1 exp(-|s_i - location_i| / b_i).
class LaplacePred {
 public:
  LaplacePred(Vector location, Vector scale) : location_(std::move(location)), scale_(std::move(scale)) {
    require_dim(scale_.size(), location_.size(), "LaplacePred scale");
    for (Index i = 0; i < scale_.size(); ++i) {
      if (!(scale_(i) > 0.0) || !std::isfinite(scale_(i))) {
        throw DomainError("LaplacePred: scale must be positive and finite");
      }
    }
  }

  Index dim() const { return location_.size(); }
  const Vector& location() const { return location_; }
  const Vector& scale() const { return scale_; }

  double log_density(const Vector& y) const {
    if (y.size() != dim()) return kNegInf;
    double acc = 0.0;
    for (Index i = 0; i < dim(); ++i) {
      acc -= std::log(2.0 * scale_(i)) + std::abs(y(i) - location_(i)) / scale_(i);
    }
    return std::isnan(acc) ? kNegInf : acc;
  }

  Vector sample(RandomStream& rng) const {
    Vector s(dim());
    for (Index i = 0; i < dim(); ++i) {
      const double u = rng.uniform_open() - 0.5;
      s(i) = location_(i) - scale_(i) * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
    }
    return s;
  }

  std::vector<double> parameters() const {
    std::vector<double> p(location_.data(), location_.data() + location_.size());
    p.insert(p.end(), scale_.data(), scale_.data() + scale_.size());
    return p;
  }

 private:
  Vector location_;
  Vector scale_;
};

/// Multivariate t with density
///   G((nu+d)/2) / (G(nu/2) nu^(d/2) pi^(d/2) |S|^(1/2)) [1 + q/nu]^(-(nu+d)/2).
class StudentTPred {
 public:
  StudentTPred(double dof, Vector location, Matrix scale)
      : dof_(dof), location_(std::move(location)), scale_(std::move(scale)) {
    if (!(dof_ > 0.0) || !std::isfinite(dof_)) {
      throw DomainError("StudentTPred: degrees of freedom must be positive");
    }
    require_dim(scale_.rows(), location_.size(), "StudentTPred scale");
    factor_ = factor_spd(scale_, "StudentTPred scale");
    const double d = static_cast<double>(dim());
    log_norm_ = std::lgamma(0.5 * (dof_ + d)) - std::lgamma(0.5 * dof_) -
                0.5 * d * std::log(dof_ * std::numbers::pi) - 0.5 * factor_.log_det();
  }

  Index dim() const { return location_.size(); }
  double dof() const { return dof_; }
  const Vector& location() const { return location_; }
  const Matrix& scale() const { return scale_; }

  double log_density(const Vector& y) const {
    if (y.size() != dim() || !y.allFinite()) return kNegInf;
    const double s = factor_.whiten(y - location_).stableNorm();
    const double out = log_norm_ - 0.5 * (dof_ + static_cast<double>(dim())) *
                                       detail::log1p_square_over(s, dof_);
    return std::isnan(out) ? kNegInf : out;
  }

  Vector sample(RandomStream& rng) const {
    const Vector z = rng.normal_vector(dim());
    const double mixing = std::sqrt(rng.chi_squared(dof_) / dof_);
    return location_ + factor_.lower() * z / mixing;
  }

  std::vector<double> parameters() const {
    std::vector<double> p{dof_};
    p.insert(p.end(), location_.data(), location_.data() + location_.size());
    p.insert(p.end(), scale_.data(), scale_.data() + scale_.size());
    return p;
  }

 private:
  double dof_;
  Vector location_;
  Matrix scale_;
  SpdFactor factor_;
  double log_norm_ = 0.0;
};

using PredictiveDistribution =
    std::variant<UniformBox, ExponentialBox, GaussianPred, LaplacePred, StudentTPred>;

inline double log_density(const PredictiveDistribution& dist, const Vector& y) {
  return std::visit(
      [&y](const auto& d) {
        require_dim(y.size(), d.dim(), "log_density observation");
        return d.log_density(y);
      },
      dist);
}

inline Vector sample(const PredictiveDistribution& dist, RandomStream& rng) {
  return std::visit([&rng](const auto& d) { return d.sample(rng); }, dist);
}

inline Index dim(const PredictiveDistribution& dist) {
  return std::visit([](const auto& d) { return d.dim(); }, dist);
}

inline std::string family_tag(const PredictiveDistribution& dist) {
  static const char* const kTags[] = {"uniform_box", "exponential_box", "gaussian", "laplace", "student_t"};
  return kTags[dist.index()];
}

/// Flat parameter list used in exported records; layout is family specific.
inline std::vector<double> parameters(const PredictiveDistribution& dist) {
  return std::visit([](const auto& d) { return d.parameters(); }, dist);
}

}  // namespace robpred::dist
