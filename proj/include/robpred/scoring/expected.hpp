// Closed-form expected scores: the 1-D Gaussian-predictor formula, Gaussian
// KL divergence, and three evaluations of the expected log-likelihood of the
// KF-based Gaussian predictor on a linear-Gaussian system.
#pragma once

#include <robpred/core/linalg.hpp>
#include <robpred/distributions/predictive.hpp>
#include <robpred/kalman/kalman_filter.hpp>
#include <robpred/model/linear_sds.hpp>

#include <cmath>
#include <numbers>
#include <vector>

namespace robpred::scoring {

/// E log N(y; z_hat, s2_hat) when y ~ (z, s2_true):
///   -log(sqrt(2 pi) s_hat) - (s2_true + (z - z_hat)^2) / (2 s2_hat).
inline double expected_ll_gaussian_predictor_1d(double z, double sigma2_true, double z_hat,
                                                double sigma2_hat) {
  if (!(sigma2_hat > 0.0) || !std::isfinite(sigma2_hat)) {
    throw DomainError("expected_ll_gaussian_predictor_1d: predictor variance must be positive");
  }
  if (!(sigma2_true >= 0.0)) throw DomainError("expected_ll_gaussian_predictor_1d: negative variance");
  const double shift = z - z_hat;
  return -std::log(std::sqrt(2.0 * std::numbers::pi * sigma2_hat)) -
         (sigma2_true + shift * shift) / (2.0 * sigma2_hat);
}

/// KL( N(mean1, cov1) || N(mean2, cov2) ).
inline double gaussian_kl(const Vector& mean1, const Matrix& cov1, const Vector& mean2,
                          const Matrix& cov2) {
  const Index d = mean1.size();
  require_dim(mean2.size(), d, "gaussian_kl mean");
  require_dim(cov1.rows(), d, "gaussian_kl cov1");
  require_dim(cov2.rows(), d, "gaussian_kl cov2");
  const SpdFactor f1 = factor_spd(cov1, "gaussian_kl cov1");
  const SpdFactor f2 = factor_spd(cov2, "gaussian_kl cov2");
  const Vector e = mean1 - mean2;
  const double mahal = f2.whiten(e).squaredNorm();
  const double trace = f2.llt.solve(symmetrize(cov1)).trace();
  return 0.5 * (mahal + trace - (f1.log_det() - f2.log_det()) - static_cast<double>(d));
}

/// Per-step ingredients of the closed form for the KF Gaussian predictor.
struct KfExpectedTerm {
  Vector e;           ///< mean prediction bias H x- - H x_hat-
  Matrix Sigma;       ///< H P- H' + R with true noise parameters
  Matrix Sigma_hat;   ///< H P_hat- H' + R_hat with believed parameters
  double value = 0.0; ///< contribution of this step
};

namespace detail {

struct GaussianSystem {
  Matrix Q;
  Matrix R;
  Vector mean_w;
  Vector mean_v;
};

inline GaussianSystem require_gaussian(const model::LinearSds& sds, const char* who) {
  const auto* w = std::get_if<model::GaussianNoise>(&sds.process_noise());
  const auto* v = std::get_if<model::GaussianNoise>(&sds.observation_noise());
  if (w == nullptr || v == nullptr) {
    throw DomainError(std::string(who) + ": process and observation noise must be Gaussian");
  }
  return {w->cov(), v->cov(), w->mean(), v->mean()};
}

inline double log_2pi() { return std::log(2.0 * std::numbers::pi); }

}  // namespace detail

/// Closed form of the expected log-likelihood functional as the sum
///   -1/2 sum_k { e' Sh^-1 e + tr(Sh^-1 S) + ln|Sh| + ln|R| + ln|Q| + ln|P+_{k-1}|
///                - ln|S| + (2 ln 2pi + 2) d_x + ln(2pi) d_y },
/// with P+ from the filter run on the true (Q, R, x0_cov) and the bias
///   e_k = H [prod_{i<k} F (I - K_i H)] F (x0 - x0_hat), K_i from the beliefs.
/// Requires Gaussian noise and a Gaussian initial state (x0_cov set).
inline std::vector<KfExpectedTerm> kf_gaussian_terms(const model::LinearSds& sds,
                                                     const kalman::PriorBeliefs& beliefs,
                                                     std::size_t n) {
  const auto sys = detail::require_gaussian(sds, "expected_ll_kf_gaussian");
  if (!sds.x0_cov()) throw DomainError("expected_ll_kf_gaussian: initial state covariance required");
  if (n < 1) throw DomainError("expected_ll_kf_gaussian: horizon must be >= 1");
  beliefs.check_against(sds);
  const Matrix& F = sds.F();
  const Matrix& H = sds.H();
  const Index dx = sds.state_dim();
  const double dxd = static_cast<double>(dx);
  const double dyd = static_cast<double>(sds.output_dim());
  const Matrix I = Matrix::Identity(dx, dx);
  const double log_det_q = factor_spd(sys.Q, "true Q").log_det();
  const double log_det_r = factor_spd(sys.R, "true R").log_det();

  Matrix P_plus = *sds.x0_cov();
  Matrix P_hat_plus = beliefs.P0_hat;
  Vector bias = F * (sds.x0() - beliefs.x0_hat);
  std::vector<KfExpectedTerm> terms;
  terms.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double log_det_p_prev = factor_spd(P_plus, "true P+").log_det();
    const Matrix P_minus = symmetrize(F * P_plus * F.transpose() + sys.Q);
    const Matrix P_hat_minus = symmetrize(F * P_hat_plus * F.transpose() + beliefs.Q_hat);
    KfExpectedTerm t;
    t.Sigma = symmetrize(H * P_minus * H.transpose() + sys.R);
    t.Sigma_hat = symmetrize(H * P_hat_minus * H.transpose() + beliefs.R_hat);
    t.e = H * bias;
    const SpdFactor fs = factor_spd(t.Sigma, "Sigma");
    const SpdFactor fh = factor_spd(t.Sigma_hat, "Sigma_hat");
    const double quad = fh.whiten(t.e).squaredNorm();
    const double trace = fh.llt.solve(t.Sigma).trace();
    t.value = -0.5 * (quad + trace + fh.log_det() + log_det_r + log_det_q + log_det_p_prev -
                      fs.log_det() + (2.0 * detail::log_2pi() + 2.0) * dxd + detail::log_2pi() * dyd);
    terms.push_back(std::move(t));

    const Matrix K = fs.llt.solve(H * P_minus).transpose();
    P_plus = symmetrize((I - K * H) * P_minus);
    const Matrix K_hat = fh.llt.solve(H * P_hat_minus).transpose();
    P_hat_plus = symmetrize((I - K_hat * H) * P_hat_minus);
    bias = F * (I - K_hat * H) * bias;
  }
  return terms;
}

inline double expected_ll_kf_gaussian(const model::LinearSds& sds, const kalman::PriorBeliefs& beliefs,
                                      std::size_t n) {
  double acc = 0.0;
  for (const auto& t : kf_gaussian_terms(sds, beliefs, n)) acc += t.value;
  return acc;
}

/// The known-noise special case of the same closed form:
///   -1/2 sum_k { ln(|R| |Q| |P+_{k-1}|) + 2 (ln 2pi + 1) d_x + (ln 2pi + 1) d_y }.
inline double expected_ll_kf_known_gaussian(const model::LinearSds& sds, std::size_t n) {
  const auto sys = detail::require_gaussian(sds, "expected_ll_kf_known_gaussian");
  if (!sds.x0_cov()) throw DomainError("expected_ll_kf_known_gaussian: initial state covariance required");
  const Matrix& F = sds.F();
  const Matrix& H = sds.H();
  const Index dx = sds.state_dim();
  const Matrix I = Matrix::Identity(dx, dx);
  const double log_det_q = factor_spd(sys.Q, "true Q").log_det();
  const double log_det_r = factor_spd(sys.R, "true R").log_det();
  const double constant = 2.0 * (detail::log_2pi() + 1.0) * static_cast<double>(dx) +
                          (detail::log_2pi() + 1.0) * static_cast<double>(sds.output_dim());
  Matrix P_plus = *sds.x0_cov();
  double acc = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    acc += -0.5 * (log_det_r + log_det_q + factor_spd(P_plus, "true P+").log_det() + constant);
    const Matrix P_minus = symmetrize(F * P_plus * F.transpose() + sys.Q);
    const SpdFactor fs = factor_spd(H * P_minus * H.transpose() + sys.R, "Sigma");
    const Matrix K = fs.llt.solve(H * P_minus).transpose();
    P_plus = symmetrize((I - K * H) * P_minus);
  }
  return acc;
}

/// Exact expected score of the KF Gaussian predictor from the moments of its
/// innovations r_k = y_k - H x_hat-_k. The filter runs on the beliefs; the
/// innovation mean m and covariance C follow the true system:
///   E log p_hat = -1/2 [d_y ln 2pi + ln|Sh| + tr(Sh^-1 C) + m' Sh^-1 m].
/// Handles noise means, a deterministic or Gaussian x0, and believed inputs
/// that differ from the true ones.
inline std::vector<double> kf_innovation_terms(const model::LinearSds& sds,
                                               const kalman::PriorBeliefs& beliefs, std::size_t n) {
  const auto* w = std::get_if<model::GaussianNoise>(&sds.process_noise());
  const auto* v = std::get_if<model::GaussianNoise>(&sds.observation_noise());
  if (w == nullptr || v == nullptr) {
    throw DomainError("expected_ll_kf_innovation: process and observation noise must be Gaussian");
  }
  beliefs.check_against(sds);
  const Matrix& F = sds.F();
  const Matrix& H = sds.H();
  const Matrix& G = sds.G();
  const Index dx = sds.state_dim();
  const Matrix I = Matrix::Identity(dx, dx);
  const double dyd = static_cast<double>(sds.output_dim());

  // Error of the filter estimate: x_k - x_hat+_k.
  Vector err_mean = sds.x0() - beliefs.x0_hat;
  Matrix err_cov = sds.x0_cov() ? *sds.x0_cov() : Matrix::Zero(dx, dx);
  Matrix P_hat_plus = beliefs.P0_hat;
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const Vector du = sds.input(k - 1) - beliefs.input(k - 1, sds.input_dim());
    const Vector pred_mean = F * err_mean + G * du + w->mean();
    const Matrix pred_cov = symmetrize(F * err_cov * F.transpose() + w->cov());
    const Matrix P_hat_minus = symmetrize(F * P_hat_plus * F.transpose() + beliefs.Q_hat);
    const Matrix Sigma_hat = symmetrize(H * P_hat_minus * H.transpose() + beliefs.R_hat);
    const SpdFactor fh = factor_spd(Sigma_hat, "Sigma_hat");

    const Vector innov_mean = H * pred_mean + v->mean();
    const Matrix innov_cov = symmetrize(H * pred_cov * H.transpose() + v->cov());
    out.push_back(-0.5 * (dyd * detail::log_2pi() + fh.log_det() + fh.llt.solve(innov_cov).trace() +
                          fh.whiten(innov_mean).squaredNorm()));

    const Matrix K_hat = fh.llt.solve(H * P_hat_minus).transpose();
    const Matrix A = I - K_hat * H;
    err_mean = A * pred_mean - K_hat * v->mean();
    err_cov = symmetrize(A * pred_cov * A.transpose() + K_hat * v->cov() * K_hat.transpose());
    P_hat_plus = symmetrize(A * P_hat_minus);
  }
  return out;
}

inline double expected_ll_kf_innovation(const model::LinearSds& sds, const kalman::PriorBeliefs& beliefs,
                                        std::size_t n) {
  double acc = 0.0;
  for (double t : kf_innovation_terms(sds, beliefs, n)) acc += t;
  return acc;
}

/// Score of N(0, 1) at a two-point outcome y1 in {-1, +1}.
inline double two_point_score(double y1) {
  if (y1 != 1.0 && y1 != -1.0) throw DomainError("two_point_score: outcome must be -1 or +1");
  const dist::GaussianPred standard(Vector::Zero(1), Matrix::Identity(1, 1));
  return standard.log_density(Vector::Constant(1, y1));
}

/// Sensitivity of the half-bounded first-order predictor to its rate
/// parameter: Gamma(x) = x (z - lower) + log(-x), for x < 0.
inline double sensitivity_gamma(double x, double z, double lower) {
  if (!(x < 0.0)) throw DomainError("sensitivity_gamma: x must be negative");
  return x * (z - lower) + std::log(-x);
}

}  // namespace robpred::scoring
