// Small dense linear-algebra helpers shared by the filter and the predictive
// families: symmetrization, SPD factorization with optional jitter, log-det.
#pragma once

#include <robpred/core/types.hpp>

#include <Eigen/Cholesky>

#include <string>

namespace robpred {

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline bool is_finite(const Matrix& m) { return m.allFinite(); }

/// Cholesky factor of a symmetric positive definite matrix.
struct SpdFactor {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;  ///< amount added to the diagonal, 0 when none

  Index dim() const { return llt.matrixLLT().rows(); }

  double log_det() const {
    const auto& l = llt.matrixLLT();
    double acc = 0.0;
    for (Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
    return 2.0 * acc;
  }

  Matrix lower() const { return llt.matrixL(); }

  /// Solves L w = r and returns w, so that |w|^2 = r' M^-1 r.
  Vector whiten(const Vector& r) const { return llt.matrixL().solve(r); }

  Matrix inverse() const { return llt.solve(Matrix::Identity(dim(), dim())); }
};

namespace detail {
inline bool try_llt(const Matrix& m, Eigen::LLT<Matrix>& out) {
  if (!m.allFinite()) return false;
  out.compute(m);
  if (out.info() != Eigen::Success) return false;
  const auto& l = out.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return false;
  }
  return true;
}
}  // namespace detail

/// Factorizes a matrix that must be SPD; throws DomainError otherwise.
inline SpdFactor factor_spd(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(what + ": matrix must be square and non-empty");
  }
  SpdFactor f;
  if (!detail::try_llt(symmetrize(m), f.llt)) {
    throw DomainError(what + ": matrix is not symmetric positive definite");
  }
  return f;
}

/// Factorizes m; on failure retries once with eps * trace(m)/d added to the
/// diagonal. Throws NumericalError when both attempts fail.
inline SpdFactor factor_spd_with_jitter(const Matrix& m, double eps,
                                        const std::string& what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(what + ": matrix must be square and non-empty");
  }
  SpdFactor f;
  const Matrix sym = symmetrize(m);
  if (detail::try_llt(sym, f.llt)) return f;
  const double jitter = eps * sym.trace() / static_cast<double>(sym.rows());
  if (jitter > 0.0 && std::isfinite(jitter)) {
    Matrix reg = sym;
    reg.diagonal().array() += jitter;
    if (detail::try_llt(reg, f.llt)) {
      f.jitter = jitter;
      return f;
    }
  }
  throw NumericalError(what + ": factorization failed even after jitter");
}

}  // namespace robpred
