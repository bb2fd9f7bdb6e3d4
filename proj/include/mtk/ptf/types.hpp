#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mtk::ptf {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Rank-3 tensor as a list of matrices along the leading axis, e.g. features
/// (t, c, f') are t matrices of c x f'.
template <typename Scalar>
using Tensor3 = std::vector<Matrix<Scalar>>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using Tensor3d = Tensor3<double>;

}  // namespace mtk::ptf
