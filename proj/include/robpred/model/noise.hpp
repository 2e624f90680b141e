// Noise distributions driving the linear system. All specs validate their
// parameters at construction and are immutable afterwards.
#pragma once

#include <robpred/core/linalg.hpp>
#include <robpred/core/rng.hpp>
#include <robpred/core/types.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <variant>

namespace robpred::model {

class GaussianNoise {
 public:
  GaussianNoise(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    require_dim(cov_.rows(), mean_.size(), "GaussianNoise covariance rows");
    require_dim(cov_.cols(), mean_.size(), "GaussianNoise covariance cols");
    lower_ = factor_spd(cov_, "GaussianNoise covariance").lower();
  }

  /// Zero covariance: every draw equals `value`.
  static GaussianNoise degenerate(Vector value) {
    return GaussianNoise(std::move(value), DegenerateTag{});
  }

  static GaussianNoise standard(Index d) {
    return GaussianNoise(Vector::Zero(d), Matrix::Identity(d, d));
  }

  Index dim() const { return mean_.size(); }
  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  bool is_degenerate() const { return degenerate_; }

  Vector sample(RandomStream& rng) const {
    if (degenerate_) return mean_;
    return mean_ + lower_ * rng.normal_vector(dim());
  }

 private:
  struct DegenerateTag {};
  GaussianNoise(Vector value, DegenerateTag)
      : mean_(std::move(value)),
        cov_(Matrix::Zero(mean_.size(), mean_.size())),
        lower_(Matrix::Zero(mean_.size(), mean_.size())),
        degenerate_(true) {}

  Vector mean_;
  Matrix cov_;
  Matrix lower_;
  bool degenerate_ = false;
};

/// Multivariate Student-t: location + L z / sqrt(chi2(dof) / dof), where
/// L L' = scale and one chi-square factor is shared by all components.
class StudentTNoise {
 public:
  StudentTNoise(double dof, Vector location, Matrix scale)
      : dof_(dof), location_(std::move(location)), scale_(std::move(scale)) {
    if (!(dof_ > 0.0) || !std::isfinite(dof_)) {
      throw DomainError("StudentTNoise: degrees of freedom must be positive");
    }
    require_dim(scale_.rows(), location_.size(), "StudentTNoise scale rows");
    require_dim(scale_.cols(), location_.size(), "StudentTNoise scale cols");
    lower_ = factor_spd(scale_, "StudentTNoise scale").lower();
  }

  static StudentTNoise standard(Index d, double dof) {
    return StudentTNoise(dof, Vector::Zero(d), Matrix::Identity(d, d));
  }

  Index dim() const { return location_.size(); }
  double dof() const { return dof_; }
  const Vector& location() const { return location_; }
  const Matrix& scale() const { return scale_; }

  Vector sample(RandomStream& rng) const {
    const Vector z = rng.normal_vector(dim());
    const double mixing = std::sqrt(rng.chi_squared(dof_) / dof_);
    return location_ + lower_ * z / mixing;
  }

 private:
  double dof_;
  Vector location_;
  Matrix scale_;
  Matrix lower_;
};

/// Each component independently takes first(i) with probability `prob_first`
/// and second(i) otherwise.
class TwoPointNoise {
 public:
  TwoPointNoise(Vector first, Vector second, double prob_first)
      : first_(std::move(first)), second_(std::move(second)), prob_first_(prob_first) {
    require_dim(second_.size(), first_.size(), "TwoPointNoise values");
    if (!(prob_first_ >= 0.0 && prob_first_ <= 1.0)) {
      throw DomainError("TwoPointNoise: probability must lie in [0, 1]");
    }
  }

  Index dim() const { return first_.size(); }
  const Vector& first() const { return first_; }
  const Vector& second() const { return second_; }
  double prob_first() const { return prob_first_; }

  Vector sample(RandomStream& rng) const {
    Vector out(dim());
    for (Index i = 0; i < dim(); ++i) {
      out(i) = rng.uniform_open() < prob_first_ ? first_(i) : second_(i);
    }
    return out;
  }

 private:
  Vector first_;
  Vector second_;
  double prob_first_;
};

using NoiseSpec = std::variant<GaussianNoise, StudentTNoise, TwoPointNoise>;

inline Vector sample_noise(const NoiseSpec& spec, RandomStream& rng) {
  return std::visit([&rng](const auto& s) { return s.sample(rng); }, spec);
}

inline Index noise_dim(const NoiseSpec& spec) {
  return std::visit([](const auto& s) { return s.dim(); }, spec);
}

inline bool is_gaussian(const NoiseSpec& spec) {
  return std::holds_alternative<GaussianNoise>(spec);
}

inline std::string noise_kind(const NoiseSpec& spec) {
  switch (spec.index()) {
    case 0: return "gaussian";
    case 1: return "student_t";
    default: return "two_point";
  }
}

}  // namespace robpred::model
