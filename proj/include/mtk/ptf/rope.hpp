#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "mtk/error.hpp"
#include "mtk/ptf/types.hpp"

namespace mtk::ptf {

inline constexpr double kRopeBase = 10000.0;

/// Rotary position embedding. Row r of x (seq x d) is split into pairs
/// (2i, 2i+1), each rotated by positions[r] * base^(-2i/d).
template <typename Derived>
Matrix<typename Derived::Scalar> rope_apply(const Eigen::MatrixBase<Derived>& x,
                                            std::span<const double> positions,
                                            double base = kRopeBase) {
  using S = typename Derived::Scalar;
  const Eigen::Index d = x.cols();
  if (d % 2 != 0) throw ContractError("RoPE needs an even feature dimension");
  if (static_cast<Eigen::Index>(positions.size()) != x.rows())
    throw ContractError("RoPE needs one position per row");
  Matrix<S> out(x.rows(), d);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index i = 0; i < d / 2; ++i) {
      const double freq = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(d));
      const double angle = positions[static_cast<std::size_t>(r)] * freq;
      const S c = static_cast<S>(std::cos(angle));
      const S s = static_cast<S>(std::sin(angle));
      const S a = x(r, 2 * i);
      const S b = x(r, 2 * i + 1);
      out(r, 2 * i) = a * c - b * s;
      out(r, 2 * i + 1) = a * s + b * c;
    }
  }
  return out;
}

inline std::vector<double> sequential_positions(std::size_t n, double offset = 0.0) {
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = offset + static_cast<double>(i);
  return p;
}

/// Parameter-free sinusoidal position encoding (seq x d), sin on even and cos
/// on odd features.
inline MatrixXd sinusoidal_positions(Eigen::Index seq, Eigen::Index d, double base = kRopeBase) {
  MatrixXd pe(seq, d);
  for (Eigen::Index p = 0; p < seq; ++p)
    for (Eigen::Index i = 0; i < d; ++i) {
      const double freq =
          std::pow(base, -2.0 * static_cast<double>(i / 2) / static_cast<double>(d));
      pe(p, i) = i % 2 == 0 ? std::sin(static_cast<double>(p) * freq)
                            : std::cos(static_cast<double>(p) * freq);
    }
  return pe;
}

}  // namespace mtk::ptf
