// Linear stochastic dynamical system
//   x_{k+1} = F x_k + G u_k + w_k
//   y_k     = H x_k + v_k
// with time-invariant matrices, and trajectory simulation.
#pragma once

#include <robpred/model/noise.hpp>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace robpred::model {

class LinearSds {
 public:
  struct Params {
    Matrix F;
    Matrix G;  ///< d_x x d_u; zero columns when the system has no input
    Matrix H;
    NoiseSpec process_noise;
    NoiseSpec observation_noise;
    Vector x0;
    std::optional<Matrix> x0_cov;  ///< absent: x0 is deterministic
    std::vector<Vector> inputs;    ///< u_0, u_1, ...; empty means zero input
  };

  explicit LinearSds(Params p) : p_(std::move(p)) {
    const Index dx = p_.F.rows();
    if (dx < 1 || p_.H.rows() < 1) {
      throw DimensionError("LinearSds: state and output dimensions must be >= 1");
    }
    require_dim(p_.F.cols(), dx, "LinearSds F cols");
    require_dim(p_.H.cols(), dx, "LinearSds H cols");
    if (p_.G.size() == 0) p_.G = Matrix::Zero(dx, 0);
    require_dim(p_.G.rows(), dx, "LinearSds G rows");
    require_dim(p_.x0.size(), dx, "LinearSds x0");
    require_dim(noise_dim(p_.process_noise), dx, "LinearSds process noise");
    require_dim(noise_dim(p_.observation_noise), p_.H.rows(), "LinearSds observation noise");
    for (const auto& u : p_.inputs) require_dim(u.size(), p_.G.cols(), "LinearSds input");
    if (p_.x0_cov) initial_.emplace(p_.x0, *p_.x0_cov);
  }

  Index state_dim() const { return p_.F.rows(); }
  Index output_dim() const { return p_.H.rows(); }
  Index input_dim() const { return p_.G.cols(); }

  const Matrix& F() const { return p_.F; }
  const Matrix& G() const { return p_.G; }
  const Matrix& H() const { return p_.H; }
  const NoiseSpec& process_noise() const { return p_.process_noise; }
  const NoiseSpec& observation_noise() const { return p_.observation_noise; }
  const Vector& x0() const { return p_.x0; }
  const std::optional<Matrix>& x0_cov() const { return p_.x0_cov; }
  const std::vector<Vector>& inputs() const { return p_.inputs; }
  const Params& params() const { return p_; }

  /// u_k, or zero when no input sequence was given.
  Vector input(std::size_t k) const {
    if (p_.inputs.empty()) return Vector::Zero(input_dim());
    return p_.inputs.at(k);
  }

  LinearSds with_initial_covariance(Matrix cov) const {
    Params p = p_;
    p.x0_cov = std::move(cov);
    return LinearSds(std::move(p));
  }

  LinearSds with_process_noise(NoiseSpec noise) const {
    Params p = p_;
    p.process_noise = std::move(noise);
    return LinearSds(std::move(p));
  }

  Vector sample_initial_state(RandomStream& rng) const {
    return initial_ ? initial_->sample(rng) : p_.x0;
  }

 private:
  Params p_;
  std::optional<GaussianNoise> initial_;
};

struct Trajectory {
  std::vector<Vector> observations;  ///< y_1 .. y_n
  std::vector<Vector> states;        ///< x_1 .. x_n
  std::uint64_t seed = 0;

  std::size_t size() const { return observations.size(); }
};

/// Draw order per step is w_{k-1} then v_k, all from `rng`.
inline Trajectory simulate_trajectory(const LinearSds& sds, std::size_t horizon,
                                      RandomStream& rng) {
  if (horizon < 1) throw DomainError("simulate_trajectory: horizon must be >= 1");
  if (!sds.inputs().empty() && sds.inputs().size() < horizon) {
    throw DimensionError("simulate_trajectory: input sequence shorter than horizon");
  }
  Trajectory traj;
  traj.seed = rng.seed();
  traj.observations.reserve(horizon);
  traj.states.reserve(horizon);
  Vector x = sds.sample_initial_state(rng);
  for (std::size_t k = 1; k <= horizon; ++k) {
    x = sds.F() * x + sds.G() * sds.input(k - 1) + sample_noise(sds.process_noise(), rng);
    Vector y = sds.H() * x + sample_noise(sds.observation_noise(), rng);
    traj.states.push_back(x);
    traj.observations.push_back(std::move(y));
  }
  return traj;
}

enum class PhiVariant { phi1, phi2 };

/// Two-dimensional constant-velocity system with x0 = [1, 2]'. phi1 has t(1)
/// process noise, phi2 standard Gaussian; both observe with standard Gaussian
/// noise.
inline LinearSds make_phi(PhiVariant variant) {
  LinearSds::Params p{
      .F = (Matrix(2, 2) << 1, 1, 0, 1).finished(),
      .G = Matrix::Zero(2, 0),
      .H = Matrix::Identity(2, 2),
      .process_noise = GaussianNoise::standard(2),
      .observation_noise = GaussianNoise::standard(2),
      .x0 = (Vector(2) << 1, 2).finished(),
      .x0_cov = std::nullopt,
      .inputs = {},
  };
  if (variant == PhiVariant::phi1) p.process_noise = StudentTNoise::standard(2, 1.0);
  return LinearSds(std::move(p));
}

}  // namespace robpred::model
