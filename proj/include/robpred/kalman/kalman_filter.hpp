// Kalman filter recursion used as the conditional-moment estimator:
//   predict: x- = F x+ + G u,  P- = F P+ F' + Q
//   update:  K = P- H' (H P- H' + R)^-1, x+ = x- + K (y - H x-), P+ = (I - K H) P-
#pragma once

#include <robpred/core/linalg.hpp>
#include <robpred/model/linear_sds.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace robpred::kalman {

/// The predictor's beliefs about the system noise and initial state.
struct PriorBeliefs {
  Matrix Q_hat;
  Matrix R_hat;
  Vector x0_hat;
  Matrix P0_hat;
  std::vector<Vector> inputs_hat;  ///< believed u_0, u_1, ...; empty means zero

  PriorBeliefs(Matrix q, Matrix r, Vector x0, Matrix p0, std::vector<Vector> u = {})
      : Q_hat(std::move(q)), R_hat(std::move(r)), x0_hat(std::move(x0)), P0_hat(std::move(p0)),
        inputs_hat(std::move(u)) {
    factor_spd(Q_hat, "PriorBeliefs Q_hat");
    factor_spd(R_hat, "PriorBeliefs R_hat");
    factor_spd(P0_hat, "PriorBeliefs P0_hat");
    require_dim(Q_hat.rows(), x0_hat.size(), "PriorBeliefs Q_hat");
    require_dim(P0_hat.rows(), x0_hat.size(), "PriorBeliefs P0_hat");
  }

  void check_against(const model::LinearSds& sds) const {
    require_dim(x0_hat.size(), sds.state_dim(), "PriorBeliefs state dimension");
    require_dim(R_hat.rows(), sds.output_dim(), "PriorBeliefs R_hat");
    for (const auto& u : inputs_hat) require_dim(u.size(), sds.input_dim(), "PriorBeliefs input");
  }

  Vector input(std::size_t k, Index du) const {
    if (inputs_hat.empty()) return Vector::Zero(du);
    return inputs_hat.at(k);
  }
};

struct KalmanState {
  Vector x_minus;
  Matrix P_minus;
  Vector x_plus;
  Matrix P_plus;
  Matrix gain;
  std::size_t step = 0;
};

/// Step-0 state: x0+ = x0_hat, P0+ = P0_hat.
inline KalmanState initial_state(const PriorBeliefs& beliefs) {
  KalmanState s;
  s.x_plus = beliefs.x0_hat;
  s.P_plus = beliefs.P0_hat;
  s.x_minus = s.x_plus;
  s.P_minus = s.P_plus;
  s.step = 0;
  return s;
}

inline KalmanState predict_step(const KalmanState& state, const model::LinearSds& sds,
                                const PriorBeliefs& beliefs) {
  KalmanState next = state;
  const Matrix& F = sds.F();
  next.x_minus = F * state.x_plus + sds.G() * beliefs.input(state.step, sds.input_dim());
  next.P_minus = symmetrize(F * state.P_plus * F.transpose() + beliefs.Q_hat);
  next.step = state.step + 1;
  return next;
}

/// Uses the simple (I - K H) P- covariance form followed by symmetrization.
/// The innovation covariance gets 1e-12 * trace/d jitter if it fails to factor.
inline KalmanState update_step(const KalmanState& state, const Vector& y,
                               const model::LinearSds& sds, const PriorBeliefs& beliefs) {
  const Matrix& H = sds.H();
  require_dim(y.size(), H.rows(), "update_step observation");
  const Matrix S = H * state.P_minus * H.transpose() + beliefs.R_hat;
  const SpdFactor f = factor_spd_with_jitter(S, 1e-12, "innovation covariance");
  KalmanState next = state;
  // K' = S^-1 H P-, using symmetry of P- and S.
  next.gain = f.llt.solve(H * state.P_minus).transpose();
  next.x_plus = state.x_minus + next.gain * (y - H * state.x_minus);
  const Index dx = state.P_minus.rows();
  next.P_plus = symmetrize((Matrix::Identity(dx, dx) - next.gain * H) * state.P_minus);
  return next;
}

struct ConditionalMoments {
  Vector mean;
  Matrix cov;
};

/// One-step predictive moments of y_k: N(H x-, H P- H' + R_hat).
inline ConditionalMoments conditional_moments(const KalmanState& state, const model::LinearSds& sds,
                                              const PriorBeliefs& beliefs) {
  const Matrix& H = sds.H();
  return {H * state.x_minus, symmetrize(H * state.P_minus * H.transpose() + beliefs.R_hat)};
}

}  // namespace robpred::kalman
