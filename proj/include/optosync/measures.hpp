#pragma once

// Scalar diagnostics of the two mechanical oscillators: EPR variances,
// quantum synchronization, the Duan/Mancini product, classical
// synchronization errors, the symplectic physicality check and windowed
// time averages.

#include <cmath>
#include <complex>
#include <span>

#include "optosync/errors.hpp"
#include "optosync/model.hpp"
#include "optosync/types.hpp"

namespace optosync {

/// Variances of q_-/p_-/q_+/p_+ with x_-+ = (x1 -+ x2)/sqrt(2).
template <typename Scalar>
struct EprVariances {
  Scalar var_q_minus{};
  Scalar var_p_minus{};
  Scalar var_q_plus{};
  Scalar var_p_plus{};
};

template <typename Scalar>
EprVariances<Scalar> epr_variances(const Matrix8<Scalar>& v) {
  using namespace idx;
  const Scalar half(0.5);
  EprVariances<Scalar> e;
  e.var_q_minus = half * (v(kQ1, kQ1) + v(kQ2, kQ2) - v(kQ1, kQ2) - v(kQ2, kQ1));
  e.var_p_minus = half * (v(kP1, kP1) + v(kP2, kP2) - v(kP1, kP2) - v(kP2, kP1));
  e.var_q_plus = half * (v(kQ1, kQ1) + v(kQ2, kQ2) + v(kQ1, kQ2) + v(kQ2, kQ1));
  e.var_p_plus = half * (v(kP1, kP1) + v(kP2, kP2) + v(kP1, kP2) + v(kP2, kP1));
  return e;
}

/// S_q = 1 / (<dq_-^2> + <dp_-^2>).
template <typename Scalar>
Scalar sync_quantum(const Matrix8<Scalar>& v) {
  const auto e = epr_variances(v);
  const Scalar sum = e.var_q_minus + e.var_p_minus;
  if (!(sum > Scalar(1e-12))) {
    throw Error(ErrorCode::kDegenerateVariance, "q_- and p_- variances sum to a non-positive value");
  }
  return Scalar(1) / sum;
}

/// E_D = <dq_-^2><dp_+^2>; separable states satisfy E_D >= 1/4.
template <typename Scalar>
Scalar entanglement_product(const Matrix8<Scalar>& v) {
  const auto e = epr_variances(v);
  return e.var_q_minus * e.var_p_plus;
}

inline constexpr double kSeparabilityBound = 0.25;

/// Strict inequality, no tolerance band.
template <typename Scalar>
bool is_entangled(Scalar e_d) {
  return e_d < Scalar(kSeparabilityBound);
}

template <typename Scalar>
struct ClassicalErrors {
  Scalar q_minus{};
  Scalar p_minus{};
  Scalar q_plus{};
  Scalar p_plus{};
};

template <typename Scalar>
ClassicalErrors<Scalar> classical_errors(const MeanFieldState<Scalar>& s) {
  using std::sqrt;
  const Scalar inv_root2 = Scalar(1) / sqrt(Scalar(2));
  return {(s.qbar(0) - s.qbar(1)) * inv_root2, (s.pbar(0) - s.pbar(1)) * inv_root2,
          (s.qbar(0) + s.qbar(1)) * inv_root2, (s.pbar(0) + s.pbar(1)) * inv_root2};
}

/// Block-diagonal symplectic form with [[0, 1], [-1, 0]] blocks.
template <typename Scalar>
Matrix8<Scalar> symplectic_form() {
  Matrix8<Scalar> omega = Matrix8<Scalar>::Zero();
  for (int k = 0; k < kDim; k += 2) {
    omega(k, k + 1) = Scalar(1);
    omega(k + 1, k) = Scalar(-1);
  }
  return omega;
}

inline constexpr double kPhysicalityTolerance = 1e-6;

template <typename Scalar>
struct Physicality {
  bool ok{};
  Scalar min_eigenvalue{};  ///< of V + (i/2) Omega
};

/// Uncertainty-principle check on the full 8-mode state: smallest
/// eigenvalue of the Hermitian matrix V + (i/2) Omega.
template <typename Scalar>
Physicality<Scalar> physicality_check(const Matrix8<Scalar>& v, Scalar tolerance = Scalar(kPhysicalityTolerance)) {
  using Complex = std::complex<Scalar>;
  using ComplexMatrix = Eigen::Matrix<Complex, kDim, kDim>;
  const ComplexMatrix h = v.template cast<Complex>() + Complex(0, Scalar(0.5)) * symplectic_form<Scalar>().template cast<Complex>();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  const Scalar min_eig = solver.eigenvalues().minCoeff();
  return {min_eig >= -tolerance, min_eig};
}

template <typename Scalar>
Scalar symmetry_defect(const Matrix8<Scalar>& v) {
  return (v - v.transpose()).cwiseAbs().maxCoeff();
}

/// Per-sample diagnostics.
struct Metrics {
  double s_q{};
  double e_d{};
  double var_q_minus{};
  double var_p_minus{};
  double var_p_plus{};
  double q_minus_bar{};
  double p_minus_bar{};
  double q_plus_bar{};
  double p_plus_bar{};
  bool entangled{};
  bool physical{};
  double min_symplectic{};
};

Metrics compute_metrics(const MeanFieldState<double>& s, const Matrix8d& v);

struct TimeWindow {
  double t_start{};
  double t_end{};

  double length() const { return t_end - t_start; }
};

inline constexpr double kSteadyWindowSpan = 200.0;

/// The final `span` of a run, shortened to a whole number of drive
/// modulation periods 2 pi / Omega_D. Without modulation the span is used
/// as is.
TimeWindow steady_window(double t_final, double omega_drive, double span = kSteadyWindowSpan);

inline constexpr std::size_t kMinWindowSamples = 10;

/// Trapezoidal time average of a sampled series over [t_start, t_end].
/// Boundary values that fall between samples are linearly interpolated.
/// Throws kWindowTooShort when fewer than 10 samples fall in the window or
/// the window leaves the series.
double window_average(std::span<const double> times, std::span<const double> values, double t_start, double t_end);

}  // namespace optosync
