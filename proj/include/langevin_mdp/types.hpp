#pragma once

#include <Eigen/Dense>

namespace lmdp {

// Upper bound on the state dimension. State vectors and d×d coefficient
// matrices live on the stack so the inner simulation loops never allocate.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

// Row i holds the state at grid node i.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace lmdp
