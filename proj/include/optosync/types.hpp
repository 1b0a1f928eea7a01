#pragma once

#include <Eigen/Dense>

namespace optosync {

/// Phase-space dimension of the fluctuation vector
/// R = (dq1, dp1, dqa1, dpa1, dq2, dp2, dqa2, dpa2).
inline constexpr int kDim = 8;

template <typename Scalar>
using Matrix8 = Eigen::Matrix<Scalar, kDim, kDim>;
template <typename Scalar>
using Vector8 = Eigen::Matrix<Scalar, kDim, 1>;

using Matrix8d = Matrix8<double>;
using Vector8d = Vector8<double>;

/// Covariance of the fluctuation quadratures over the basis R.
template <typename Scalar>
using CovarianceMatrix = Matrix8<Scalar>;

/// Positions in R (and in the mean-field vector, which shares the layout).
namespace idx {
inline constexpr int kQ1 = 0;
inline constexpr int kP1 = 1;
inline constexpr int kQa1 = 2;
inline constexpr int kPa1 = 3;
inline constexpr int kQ2 = 4;
inline constexpr int kP2 = 5;
inline constexpr int kQa2 = 6;
inline constexpr int kPa2 = 7;

/// First index of oscillator j's 4-block (j = 0 or 1).
constexpr int block(int j) { return 4 * j; }
}  // namespace idx

}  // namespace optosync
