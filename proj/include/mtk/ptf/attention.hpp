#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "mtk/error.hpp"
#include "mtk/ptf/activations.hpp"
#include "mtk/ptf/rope.hpp"

namespace mtk::ptf {

/// Bias-free multi-head attention projections. query is (inner x d_q),
/// key/value are (inner x d_kv), output is (d_q x inner); inner = heads * head_dim.
template <typename Scalar>
struct AttentionWeights {
  Matrix<Scalar> query;
  Matrix<Scalar> key;
  Matrix<Scalar> value;
  Matrix<Scalar> output;
  int heads = 1;

  Eigen::Index inner_dim() const { return query.rows(); }
  Eigen::Index head_dim() const { return query.rows() / heads; }
};

template <typename Scalar>
struct AttentionOutput {
  Matrix<Scalar> out;
  /// One (n_queries x n_keys) row-stochastic matrix per head.
  std::vector<Matrix<Scalar>> probs;
};

/// Scaled dot-product attention of `queries` (n_q x d_q) over `context`
/// (n_kv x d_kv). When positions are given, RoPE is applied to every head's
/// queries and keys.
template <typename DQ, typename DK>
AttentionOutput<typename DQ::Scalar> multi_head_attention(
    const Eigen::MatrixBase<DQ>& queries, const Eigen::MatrixBase<DK>& context,
    const AttentionWeights<typename DQ::Scalar>& w,
    std::optional<std::span<const double>> query_positions = std::nullopt,
    std::optional<std::span<const double>> key_positions = std::nullopt) {
  using S = typename DQ::Scalar;
  if (w.heads < 1 || w.query.rows() % w.heads != 0)
    throw ContractError("inner dimension must divide evenly into heads");
  if (w.query.cols() != queries.cols() || w.key.cols() != context.cols() ||
      w.value.cols() != context.cols() || w.key.rows() != w.query.rows() ||
      w.value.rows() != w.query.rows() || w.output.cols() != w.query.rows() ||
      w.output.rows() != queries.cols())
    throw ContractError("attention weight shapes do not match the inputs");

  const Matrix<S> q = queries * w.query.transpose();
  const Matrix<S> k = context * w.key.transpose();
  const Matrix<S> v = context * w.value.transpose();
  const Eigen::Index hd = w.head_dim();
  const S scale = S(1) / std::sqrt(static_cast<S>(hd));

  AttentionOutput<S> result;
  Matrix<S> heads_out(queries.rows(), w.query.rows());
  for (int h = 0; h < w.heads; ++h) {
    Matrix<S> qh = q.middleCols(h * hd, hd);
    Matrix<S> kh = k.middleCols(h * hd, hd);
    if (query_positions) qh = rope_apply(qh, *query_positions);
    if (key_positions) kh = rope_apply(kh, *key_positions);
    Matrix<S> p = softmax_rows((qh * kh.transpose()) * scale);
    heads_out.middleCols(h * hd, hd) = p * v.middleCols(h * hd, hd);
    result.probs.push_back(std::move(p));
  }
  result.out = heads_out * w.output.transpose();
  return result;
}

template <typename Scalar>
struct ScaOutput {
  Tensor3<Scalar> out;                            // t x (k x d')
  std::vector<std::vector<Matrix<Scalar>>> probs;  // t x heads x (k x c)
};

/// Spectral cross-attention: at every time step the k latent queries attend
/// over the c spectral channels of that step.
template <typename Derived>
ScaOutput<typename Derived::Scalar> sca_forward(
    const Eigen::MatrixBase<Derived>& latents, const Tensor3<typename Derived::Scalar>& features,
    const AttentionWeights<typename Derived::Scalar>& w) {
  using S = typename Derived::Scalar;
  ScaOutput<S> result;
  result.out.reserve(features.size());
  for (const Matrix<S>& step : features) {
    if (!features.empty() && (step.rows() != features.front().rows() ||
                              step.cols() != features.front().cols()))
      throw ContractError("feature time steps must share one (c, f') shape");
    AttentionOutput<S> a = multi_head_attention(latents, step, w);
    result.out.push_back(std::move(a.out));
    result.probs.push_back(std::move(a.probs));
  }
  return result;
}

/// Per-time-step latents variant: latents[t] is (k x d').
template <typename Scalar>
ScaOutput<Scalar> sca_forward(const Tensor3<Scalar>& latents, const Tensor3<Scalar>& features,
                              const AttentionWeights<Scalar>& w) {
  if (latents.size() != features.size())
    throw ContractError("latents and features must have the same number of time steps");
  ScaOutput<Scalar> result;
  for (std::size_t t = 0; t < features.size(); ++t) {
    AttentionOutput<Scalar> a = multi_head_attention(latents[t], features[t], w);
    result.out.push_back(std::move(a.out));
    result.probs.push_back(std::move(a.probs));
  }
  return result;
}

}  // namespace mtk::ptf
