#pragma once

#include <cmath>

#include "mtk/ptf/types.hpp"

namespace mtk::ptf {

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(typename Derived::Scalar(0));
}

template <typename Derived>
Matrix<typename Derived::Scalar> silu(const Eigen::MatrixBase<Derived>& x) {
  using S = typename Derived::Scalar;
  return x.unaryExpr([](S v) { return v / (S(1) + std::exp(-v)); });
}

/// Row-wise numerically stable softmax.
template <typename Derived>
Matrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using S = typename Derived::Scalar;
  Matrix<S> out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const S m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// RMS normalization over the last axis with a learned per-feature gain.
template <typename Derived, typename GainDerived>
Matrix<typename Derived::Scalar> rms_norm(const Eigen::MatrixBase<Derived>& x,
                                          const Eigen::MatrixBase<GainDerived>& gain,
                                          typename Derived::Scalar eps = 1e-6) {
  using S = typename Derived::Scalar;
  Matrix<S> out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const S rms = std::sqrt(x.row(i).squaredNorm() / S(x.cols()) + eps);
    out.row(i) = x.row(i).cwiseProduct(gain.reshaped().transpose()) / rms;
  }
  return out;
}

}  // namespace mtk::ptf
