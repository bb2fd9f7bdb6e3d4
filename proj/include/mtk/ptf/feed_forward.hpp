#pragma once

#include "mtk/error.hpp"
#include "mtk/ptf/activations.hpp"

namespace mtk::ptf {

/// FFN(h) = ReLU(h W1^T) ⊙ W2, taken literally: W1 is d x d and W2 is a
/// length-d row gain broadcast over the rows of h.
template <typename Scalar>
struct LiteralFfnWeights {
  Matrix<Scalar> w1;
  RowVector<Scalar> w2;
};

/// Bias-free gated feed-forward: W1 and V are (d_ff x d), W2 is (d x d_ff).
template <typename Scalar>
struct GatedFfnWeights {
  Matrix<Scalar> w1;
  Matrix<Scalar> v_gate;
  Matrix<Scalar> w2;

  Eigen::Index model_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
};

template <typename Derived>
Matrix<typename Derived::Scalar> ffn_forward(
    const Eigen::MatrixBase<Derived>& h,
    const LiteralFfnWeights<typename Derived::Scalar>& w) {
  if (w.w1.cols() != h.cols() || w.w1.rows() != h.cols() || w.w2.cols() != h.cols())
    throw ContractError("FFN weight shapes do not match the input");
  Matrix<typename Derived::Scalar> out = relu(h * w.w1.transpose());
  out.array().rowwise() *= w.w2.array();
  return out;
}

namespace detail {
template <typename Scalar>
void check_gated(Eigen::Index d, const GatedFfnWeights<Scalar>& w) {
  if (w.w1.cols() != d || w.v_gate.cols() != d || w.v_gate.rows() != w.w1.rows() ||
      w.w2.rows() != d || w.w2.cols() != w.w1.rows())
    throw ContractError("gated FFN weight shapes do not match the input");
}
}  // namespace detail

/// Conventional gated form of the FFN: (ReLU(h W1^T) ⊙ (h V^T)) W2^T.
template <typename Derived>
Matrix<typename Derived::Scalar> ffn_forward_gated(
    const Eigen::MatrixBase<Derived>& h, const GatedFfnWeights<typename Derived::Scalar>& w) {
  detail::check_gated(h.cols(), w);
  const Matrix<typename Derived::Scalar> a = relu(h * w.w1.transpose());
  return a.cwiseProduct(h * w.v_gate.transpose()) * w.w2.transpose();
}

/// GLU expert with SiLU: (SiLU(h W1^T) ⊙ (h V^T)) W2^T.
template <typename Derived>
Matrix<typename Derived::Scalar> expert_forward(
    const Eigen::MatrixBase<Derived>& h, const GatedFfnWeights<typename Derived::Scalar>& w) {
  detail::check_gated(h.cols(), w);
  const Matrix<typename Derived::Scalar> a = silu(h * w.w1.transpose());
  return a.cwiseProduct(h * w.v_gate.transpose()) * w.w2.transpose();
}

}  // namespace mtk::ptf
