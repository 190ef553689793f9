#pragma once

#include <apfem/types.hpp>

#include <cmath>

namespace apfem {

/// Thomas algorithm for a tridiagonal system without pivoting.
/// `lower[i]` couples row i+1 to column i, `upper[i]` couples row i to column i+1.
template <typename DiagDerived, typename OffDerived, typename RhsDerived>
Vec<typename DiagDerived::Scalar> thomas_solve(const Eigen::MatrixBase<OffDerived>& lower,
                                               const Eigen::MatrixBase<DiagDerived>& diag,
                                               const Eigen::MatrixBase<OffDerived>& upper,
                                               const Eigen::MatrixBase<RhsDerived>& rhs) {
  using Scalar = typename DiagDerived::Scalar;
  const Index n = diag.size();
  detail::require(rhs.size() == n, "rhs length does not match the system");
  detail::require(n == 0 || (lower.size() == n - 1 && upper.size() == n - 1),
                  "off-diagonal length must be n - 1");
  if (!diag.allFinite() || !lower.allFinite() || !upper.allFinite() || !rhs.allFinite()) {
    throw NumericalError("tridiagonal solve: non-finite input");
  }
  Vec<Scalar> c(n), x(n);
  Scalar pivot = diag[0];
  for (Index i = 0; i < n; ++i) {
    if (i > 0) pivot = diag[i] - lower[i - 1] * c[i - 1];
    if (pivot == Scalar(0) || !std::isfinite(double(pivot))) {
      throw NumericalError("tridiagonal solve: zero pivot in row " + std::to_string(i));
    }
    c[i] = i + 1 < n ? upper[i] / pivot : Scalar(0);
    x[i] = (rhs[i] - (i > 0 ? lower[i - 1] * x[i - 1] : Scalar(0))) / pivot;
  }
  for (Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace apfem
