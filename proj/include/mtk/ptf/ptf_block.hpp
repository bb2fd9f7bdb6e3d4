#pragma once

#include <variant>
#include <vector>

#include "mtk/ptf/attention.hpp"
#include "mtk/ptf/moe.hpp"

namespace mtk::ptf {

template <typename Scalar>
using FeedForwardWeights =
    std::variant<LiteralFfnWeights<Scalar>, GatedFfnWeights<Scalar>, MoEWeights<Scalar>>;

template <typename Derived>
Matrix<typename Derived::Scalar> feed_forward(
    const Eigen::MatrixBase<Derived>& h,
    const FeedForwardWeights<typename Derived::Scalar>& w) {
  using S = typename Derived::Scalar;
  return std::visit(
      [&](const auto& weights) -> Matrix<S> {
        using W = std::decay_t<decltype(weights)>;
        if constexpr (std::is_same_v<W, LiteralFfnWeights<S>>)
          return ffn_forward(h, weights);
        else if constexpr (std::is_same_v<W, GatedFfnWeights<S>>)
          return ffn_forward_gated(h, weights);
        else
          return moe_forward(h, weights).out;
      },
      w);
}

/// Pre-RMSNorm transformer sub-block: self-attention with RoPE, then a
/// feed-forward (plain or MoE), each with a residual connection.
template <typename Scalar>
struct SublayerWeights {
  Vector<Scalar> attention_norm;
  AttentionWeights<Scalar> attention;
  Vector<Scalar> ffn_norm;
  FeedForwardWeights<Scalar> ffn;
};

template <typename Derived>
Matrix<typename Derived::Scalar> transformer_sublayer(
    const Eigen::MatrixBase<Derived>& x, const SublayerWeights<typename Derived::Scalar>& w) {
  using S = typename Derived::Scalar;
  const std::vector<double> pos = sequential_positions(static_cast<std::size_t>(x.rows()));
  const std::span<const double> p(pos);
  const Matrix<S> normed = rms_norm(x, w.attention_norm);
  Matrix<S> h = x + multi_head_attention(normed, normed, w.attention, p, p).out;
  return h + feed_forward(rms_norm(h, w.ffn_norm), w.ffn);
}

template <typename Scalar>
struct PtfIterationWeights {
  Vector<Scalar> sca_norm;
  AttentionWeights<Scalar> sca;
  SublayerWeights<Scalar> latent;
  SublayerWeights<Scalar> temporal;
};

/// One PTF iteration over per-step latents (t x (k x d')): spectral
/// cross-attention into the features, the latent transformer across the k
/// latents of each step, then the temporal transformer across the t steps
/// of each latent.
template <typename Scalar>
Tensor3<Scalar> ptf_iteration(const Tensor3<Scalar>& latents, const Tensor3<Scalar>& features,
                              const PtfIterationWeights<Scalar>& w) {
  if (latents.size() != features.size() || latents.empty())
    throw ContractError("latents and features must share a non-empty time axis");
  const std::size_t t_steps = latents.size();
  Tensor3<Scalar> z(t_steps);
  for (std::size_t t = 0; t < t_steps; ++t) {
    const Matrix<Scalar> q = rms_norm(latents[t], w.sca_norm);
    z[t] = latents[t] + multi_head_attention(q, features[t], w.sca).out;
    z[t] = transformer_sublayer(z[t], w.latent);
  }
  const Eigen::Index k = z.front().rows();
  const Eigen::Index d = z.front().cols();
  for (Eigen::Index i = 0; i < k; ++i) {
    Matrix<Scalar> seq(static_cast<Eigen::Index>(t_steps), d);
    for (std::size_t t = 0; t < t_steps; ++t) seq.row(static_cast<Eigen::Index>(t)) = z[t].row(i);
    seq = transformer_sublayer(seq, w.temporal);
    for (std::size_t t = 0; t < t_steps; ++t) z[t].row(i) = seq.row(static_cast<Eigen::Index>(t));
  }
  return z;
}

/// Encoder forward: the learned latent array is the query of the first
/// iteration, the previous output for the following ones.
template <typename Scalar>
Tensor3<Scalar> ptf_encoder_forward(const Matrix<Scalar>& latent_array,
                                    const Tensor3<Scalar>& features,
                                    const std::vector<PtfIterationWeights<Scalar>>& iterations) {
  Tensor3<Scalar> z(features.size(), latent_array);
  for (const auto& w : iterations) z = ptf_iteration(z, features, w);
  return z;
}

}  // namespace mtk::ptf
