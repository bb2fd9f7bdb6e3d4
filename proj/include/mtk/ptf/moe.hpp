#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mtk/error.hpp"
#include "mtk/ptf/feed_forward.hpp"

namespace mtk::ptf {

template <typename Scalar>
struct MoEWeights {
  Matrix<Scalar> gate;  // d x n_experts
  std::vector<GatedFfnWeights<Scalar>> experts;
  int top_k = 2;
};

struct RouteChoice {
  int expert = 0;
  double weight = 0.0;
};

template <typename Scalar>
struct MoEOutput {
  Matrix<Scalar> out;
  /// Per token, the selected experts in descending logit order.
  std::vector<std::vector<RouteChoice>> trace;
};

/// Top-k routing: per token, softmax over the k largest gate logits (ties go
/// to the lower expert index) and a weighted sum of the selected experts.
template <typename Derived>
MoEOutput<typename Derived::Scalar> moe_forward(
    const Eigen::MatrixBase<Derived>& h, const MoEWeights<typename Derived::Scalar>& w) {
  using S = typename Derived::Scalar;
  const auto n_experts = static_cast<int>(w.experts.size());
  if (n_experts == 0) throw ContractError("MoE needs at least one expert");
  if (w.top_k < 1 || w.top_k > n_experts) throw ContractError("top_k must be in [1, n_experts]");
  if (w.gate.rows() != h.cols() || w.gate.cols() != n_experts)
    throw ContractError("gate weight shape does not match the input");

  const Matrix<S> logits = h * w.gate;
  MoEOutput<S> result;
  result.out = Matrix<S>::Zero(h.rows(), h.cols());
  result.trace.resize(static_cast<std::size_t>(h.rows()));

  std::vector<int> order(static_cast<std::size_t>(n_experts));
  for (Eigen::Index t = 0; t < h.rows(); ++t) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return logits(t, a) > logits(t, b); });
    const S top = logits(t, order[0]);
    std::vector<S> weights(static_cast<std::size_t>(w.top_k));
    S denom = 0;
    for (int i = 0; i < w.top_k; ++i) {
      weights[static_cast<std::size_t>(i)] = std::exp(logits(t, order[static_cast<std::size_t>(i)]) - top);
      denom += weights[static_cast<std::size_t>(i)];
    }
    auto& trace = result.trace[static_cast<std::size_t>(t)];
    for (int i = 0; i < w.top_k; ++i) {
      const int e = order[static_cast<std::size_t>(i)];
      const S g = weights[static_cast<std::size_t>(i)] / denom;
      trace.push_back({e, static_cast<double>(g)});
      result.out.row(t) += g * expert_forward(h.row(t), w.experts[static_cast<std::size_t>(e)]);
    }
  }
  return result;
}

}  // namespace mtk::ptf
