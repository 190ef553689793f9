#pragma once

// Block-tridiagonal systems with 2x2 blocks: storage, block LU without
// pivoting, and the conditioning monitors used to flag unreliable solves.

#include <apfem/types.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace apfem {

template <typename Scalar = double>
class BlockTridiagonal {
 public:
  using Block = Mat2<Scalar>;

  explicit BlockTridiagonal(Index n_blocks)
      : lower_(n_blocks, Block::Zero()), diag_(n_blocks, Block::Zero()), upper_(n_blocks, Block::Zero()) {}

  Index size() const { return Index(diag_.size()); }

  // lower(i) couples block row i to column i-1; upper(i) couples row i to i+1.
  Block& lower(Index i) { return lower_[i]; }
  Block& diag(Index i) { return diag_[i]; }
  Block& upper(Index i) { return upper_[i]; }
  const Block& lower(Index i) const { return lower_[i]; }
  const Block& diag(Index i) const { return diag_[i]; }
  const Block& upper(Index i) const { return upper_[i]; }

  Field2<Scalar> operator*(const Field2<Scalar>& x) const {
    const Index n = size();
    Field2<Scalar> y(2, n);
    for (Index i = 0; i < n; ++i) {
      Vec2<Scalar> acc = diag_[i] * x.col(i);
      if (i > 0) acc += lower_[i] * x.col(i - 1);
      if (i + 1 < n) acc += upper_[i] * x.col(i + 1);
      y.col(i) = acc;
    }
    return y;
  }

  // identity * a + this * b
  BlockTridiagonal scaled_plus_identity(Scalar a, Scalar b) const {
    BlockTridiagonal out(size());
    for (Index i = 0; i < size(); ++i) {
      out.lower_[i] = b * lower_[i];
      out.diag_[i] = a * Block::Identity() + b * diag_[i];
      out.upper_[i] = b * upper_[i];
    }
    return out;
  }

  Scalar max_abs() const {
    Scalar m(0);
    for (Index i = 0; i < size(); ++i) {
      m = std::max({m, lower_[i].cwiseAbs().maxCoeff(), diag_[i].cwiseAbs().maxCoeff(),
                    upper_[i].cwiseAbs().maxCoeff()});
    }
    return m;
  }

  // max column sum of the assembled 2n x 2n matrix
  Scalar norm1() const {
    const Index n = size();
    Scalar best(0);
    for (Index j = 0; j < n; ++j) {
      Vec2<Scalar> col = diag_[j].cwiseAbs().colwise().sum().transpose();
      if (j > 0) col += upper_[j - 1].cwiseAbs().colwise().sum().transpose();
      if (j + 1 < n) col += lower_[j + 1].cwiseAbs().colwise().sum().transpose();
      best = std::max(best, col.maxCoeff());
    }
    return best;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const {
    const Index n = size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * n, 2 * n);
    for (Index i = 0; i < n; ++i) {
      a.template block<2, 2>(2 * i, 2 * i) = diag_[i];
      if (i > 0) a.template block<2, 2>(2 * i, 2 * (i - 1)) = lower_[i];
      if (i + 1 < n) a.template block<2, 2>(2 * i, 2 * (i + 1)) = upper_[i];
    }
    return a;
  }

 private:
  std::vector<Block, Eigen::aligned_allocator<Block>> lower_, diag_, upper_;
};

/// Block LU factorization A = L U without pivoting:
///   L: identity diagonal blocks, sub-diagonal blocks l_i = a_{i,i-1} d_{i-1}^{-1}
///   U: diagonal blocks d_i = a_ii - l_i a_{i-1,i}, super-diagonal blocks a_{i,i+1}.
/// The factorization never aborts on ill-conditioning; it records a growth
/// factor and offers a 1-norm condition estimate so callers can flag it.
template <typename Scalar = double>
class BlockLU {
 public:
  using Block = Mat2<Scalar>;

  explicit BlockLU(const BlockTridiagonal<Scalar>& a)
      : n_(a.size()), upper_(n_), l_(n_), d_inv_(n_), norm1_(a.norm1()) {
    Scalar max_d(0);
    Block d;
    for (Index i = 0; i < n_; ++i) {
      upper_[i] = a.upper(i);
      if (i == 0) {
        l_[i].setZero();
        d = a.diag(0);
      } else {
        l_[i] = a.lower(i) * d_inv_[i - 1];
        d = a.diag(i) - l_[i] * a.upper(i - 1);
      }
      const Scalar scale = d.cwiseAbs().maxCoeff();
      if (!d.allFinite() || scale == Scalar(0) || d.determinant() == Scalar(0)) {
        throw NumericalError("block LU: singular pivot block at row " + std::to_string(i));
      }
      d_inv_[i] = d.inverse();
      if (!d_inv_[i].allFinite()) {
        throw NumericalError("block LU: pivot block at row " + std::to_string(i) + " is not invertible");
      }
      max_d = std::max(max_d, scale);
    }
    const Scalar max_a = a.max_abs();
    growth_ = max_a > Scalar(0) ? max_d / max_a : Scalar(1);
  }

  Index size() const { return n_; }

  // max |d_i| / max |a_ij|
  Scalar growth_factor() const { return growth_; }

  Field2<Scalar> solve(const Field2<Scalar>& b) const {
    detail::require(b.cols() == n_, "rhs length does not match the system");
    Field2<Scalar> y(2, n_);
    for (Index i = 0; i < n_; ++i) {
      y.col(i) = b.col(i);
      if (i > 0) y.col(i) -= l_[i] * y.col(i - 1);
    }
    Field2<Scalar> x(2, n_);
    for (Index i = n_ - 1; i >= 0; --i) {
      Vec2<Scalar> r = y.col(i);
      if (i + 1 < n_) r -= upper_[i] * x.col(i + 1);
      x.col(i) = d_inv_[i] * r;
    }
    return x;
  }

  // Solves A^T x = b using U^T L^T.
  Field2<Scalar> solve_transpose(const Field2<Scalar>& b) const {
    detail::require(b.cols() == n_, "rhs length does not match the system");
    Field2<Scalar> y(2, n_);
    for (Index i = 0; i < n_; ++i) {
      Vec2<Scalar> r = b.col(i);
      if (i > 0) r -= upper_[i - 1].transpose() * y.col(i - 1);
      y.col(i) = d_inv_[i].transpose() * r;
    }
    Field2<Scalar> x(2, n_);
    for (Index i = n_ - 1; i >= 0; --i) {
      x.col(i) = y.col(i);
      if (i + 1 < n_) x.col(i) -= l_[i + 1].transpose() * x.col(i + 1);
    }
    return x;
  }

  /// Hager-Higham estimate of ||A^{-1}||_1 (a lower bound, usually sharp).
  Scalar inverse_norm1_estimate() const {
    const Index m = 2 * n_;
    auto norm1 = [](const Field2<Scalar>& f) { return f.cwiseAbs().sum(); };
    Field2<Scalar> x = Field2<Scalar>::Constant(2, n_, Scalar(1) / Scalar(m));
    Scalar est(0);
    Index last_j = -1;
    for (int iter = 0; iter < 5; ++iter) {
      const Field2<Scalar> y = solve(x);
      const Scalar ny = norm1(y);
      if (iter > 0 && ny <= est) break;
      est = ny;
      const Field2<Scalar> xi = y.unaryExpr([](Scalar s) { return s >= Scalar(0) ? Scalar(1) : Scalar(-1); });
      const Field2<Scalar> z = solve_transpose(xi);
      Index r = 0, c = 0;
      const Scalar zmax = z.cwiseAbs().maxCoeff(&r, &c);
      const Index j = 2 * c + r;
      if (zmax <= (z.array() * x.array()).sum() || j == last_j) break;
      x.setZero();
      x(r, c) = Scalar(1);
      last_j = j;
    }
    // Alternating probe guards against the estimator being fooled by cancellation.
    Field2<Scalar> alt(2, n_);
    for (Index k = 0; k < m; ++k) {
      const Scalar sign = k % 2 == 0 ? Scalar(1) : Scalar(-1);
      alt(k % 2, k / 2) = sign * (Scalar(1) + Scalar(k) / Scalar(std::max<Index>(m - 1, 1)));
    }
    const Scalar alt_est = Scalar(2) * norm1(solve(alt)) / (Scalar(3) * Scalar(m));
    return std::max(est, alt_est);
  }

  Scalar condition_estimate() const { return norm1_ * inverse_norm1_estimate(); }

 private:
  Index n_;
  std::vector<Block, Eigen::aligned_allocator<Block>> upper_, l_, d_inv_;
  Scalar norm1_;
  Scalar growth_ = Scalar(1);
};

}  // namespace apfem
