#pragma once

#include <Eigen/Dense>

namespace clfm::fieldgen {

/// Squared-exponential cross-covariance between the rows of `a` and `b`:
/// K_ij = variance * exp(-|a_i - b_j|^2 / (2 length^2)).
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> squared_exponential(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
    typename DerivedA::Scalar variance, typename DerivedA::Scalar length) {
  using Scalar = typename DerivedA::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k(a.rows(), b.rows());
  const Scalar inv = Scalar(1) / (Scalar(2) * length * length);
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      k(i, j) = variance * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
    }
  }
  return k;
}

/// Gram matrix of the rows of `x` under the squared-exponential kernel.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> squared_exponential_gram(
    const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar variance,
    typename Derived::Scalar length) {
  return squared_exponential(x, x, variance, length);
}

/// Evenly spaced points on [lo, hi] including both ends, as an (n x 1) column.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> linspace_column(Scalar lo, Scalar hi,
                                                                     Eigen::Index n) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> x(n, 1);
  x.col(0) = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(n, lo, hi);
  return x;
}

/// Tensor-product grid of two axes as (nx * ny) x 2 rows, second axis fastest.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> grid_2d(Scalar x_lo, Scalar x_hi,
                                                             Eigen::Index nx, Scalar y_lo,
                                                             Scalar y_hi, Eigen::Index ny) {
  const auto xs = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(nx, x_lo, x_hi);
  const auto ys = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(ny, y_lo, y_hi);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> g(nx * ny, 2);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      g(i * ny + j, 0) = xs(i);
      g(i * ny + j, 1) = ys(j);
    }
  }
  return g;
}

}  // namespace clfm::fieldgen
