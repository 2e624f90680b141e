#pragma once

#include <robpred/core/types.hpp>

#include <Eigen/Dense>

namespace robpred::oracle {

struct RiccatiFixedPoint {
  Matrix P_minus;
  int iterations = 0;
  bool converged = false;
};

/// Iterates P <- F (P - P H'(H P H' + R)^-1 H P) F' + Q from P0 until the
/// Frobenius step is below tol. Uses a plain inverse, unlike the filter.
inline RiccatiFixedPoint riccati_fixed_point(const Matrix& F, const Matrix& H, const Matrix& Q,
                                             const Matrix& R, Matrix P, double tol = 1e-13,
                                             int max_iter = 100000) {
  RiccatiFixedPoint out;
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix S = H * P * H.transpose() + R;
    const Matrix post = P - P * H.transpose() * S.inverse() * H * P;
    Matrix next = F * post * F.transpose() + Q;
    next = 0.5 * (next + next.transpose()).eval();
    const double step = (next - P).norm();
    P = std::move(next);
    if (step < tol) {
      out.converged = true;
      out.iterations = it;
      break;
    }
    out.iterations = it;
  }
  out.P_minus = std::move(P);
  return out;
}

}  // namespace robpred::oracle
