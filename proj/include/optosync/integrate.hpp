#pragma once

// Time integration of the joint mean-field + covariance system: a classical
// RK4 step, an embedded Dormand-Prince 5(4) step with PI step-size control,
// and the sampled propagation driver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "optosync/errors.hpp"
#include "optosync/model.hpp"
#include "optosync/types.hpp"

namespace optosync {

enum class StepMode { kFixed, kAdaptive };

/// How the covariance is carried in the flat state vector.
enum class CovarianceLayout {
  kFull,    ///< all 64 entries, re-symmetrized after every accepted step
  kPacked,  ///< 36 upper-triangular entries
};

struct IntegratorConfig {
  StepMode mode = StepMode::kAdaptive;
  double h0 = 1e-2;
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double t_end = 2000.0;
  double sample_every = 0.1;
  CovarianceLayout layout = CovarianceLayout::kFull;
  /// Abort with kPhysicalityLost when a sampled covariance falls below
  /// physicality_floor.
  bool physicality_guard = true;
  double physicality_floor = -1e-4;

  bool operator==(const IntegratorConfig&) const = default;
};

/// Throws ValidationError on h0 <= 0, t_end <= 0, tolerances <= 0 or
/// sample_every < h0.
void check_config(const IntegratorConfig& cfg);

struct JointState {
  MeanFieldState<double> mean;
  Matrix8d cov = Matrix8d::Zero();
};

/// Pre-drive state: means at rest, cavities empty, thermal_vacuum_covariance.
JointState default_initial_state(const Params& params);

struct Trajectory {
  std::vector<double> times;
  std::vector<MeanFieldState<double>> states;
  std::vector<Matrix8d> covariances;
  /// Smallest eigenvalue of V + (i/2) Omega at each sample.
  std::vector<double> min_symplectic;

  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Largest |V - V^T| seen on an accepted step before re-symmetrization.
  double max_symmetry_defect = 0.0;

  std::size_t size() const { return times.size(); }
  JointState at(std::size_t i) const { return {states[i], covariances[i]}; }
};

inline constexpr double kMinStep = 1e-12;

/// One classical fourth-order Runge-Kutta step. `rhs(t, y)` returns dy/dt.
template <typename Vec, typename Rhs>
Vec rk4_step(Rhs&& rhs, double t, const Vec& y, double h) {
  const Vec k1 = rhs(t, y);
  const Vec k2 = rhs(t + 0.5 * h, Vec(y + (0.5 * h) * k1));
  const Vec k3 = rhs(t + 0.5 * h, Vec(y + (0.5 * h) * k2));
  const Vec k4 = rhs(t + h, Vec(y + h * k3));
  Vec out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw Error(ErrorCode::kNonFinite, "RK4 step produced a non-finite state");
  return out;
}

struct Tolerances {
  double rel = 1e-8;
  double abs = 1e-10;
};

/// PI controller memory carried between adaptive steps.
struct StepControl {
  double prev_error = 1e-4;
  bool last_rejected = false;
};

template <typename Vec>
struct AdaptiveStep {
  bool accepted = false;
  Vec y;            ///< new state (valid when accepted)
  Vec dydt;         ///< derivative at the new state, reusable as the next k1
  double error = 0; ///< scaled RMS error estimate; accepted iff <= 1
  double h_next = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DoPri {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                          b6 = 11.0 / 84;
  // fifth- minus fourth-order weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline constexpr double kSafety = 0.9;
inline constexpr double kFacMin = 0.2;
inline constexpr double kFacMax = 10.0;
inline constexpr double kAlpha = 0.7 / 5.0;
inline constexpr double kBeta = 0.4 / 5.0;

}  // namespace detail

/// One Dormand-Prince 5(4) attempt starting from the known derivative k1.
/// The error is measured componentwise against abs + rel * max(|y|, |y_new|)
/// and combined as an RMS norm; the step is accepted when it is <= 1.
template <typename Vec, typename Rhs>
AdaptiveStep<Vec> adaptive_step(Rhs&& rhs, double t, const Vec& y, const Vec& k1, double h, Tolerances tol,
                                StepControl& control) {
  using T = detail::DoPri;
  if (!(h >= kMinStep)) throw Error(ErrorCode::kStepUnderflow, "step size fell below 1e-12");

  AdaptiveStep<Vec> out;
  double error = std::numeric_limits<double>::infinity();
  try {
    const Vec k2 = rhs(t + T::c2 * h, Vec(y + h * (T::a21 * k1)));
    const Vec k3 = rhs(t + T::c3 * h, Vec(y + h * (T::a31 * k1 + T::a32 * k2)));
    const Vec k4 = rhs(t + T::c4 * h, Vec(y + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)));
    const Vec k5 = rhs(t + T::c5 * h, Vec(y + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)));
    const Vec k6 =
        rhs(t + h, Vec(y + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5)));
    out.y = y + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    if (out.y.allFinite()) {
      out.dydt = rhs(t + h, out.y);
      const Vec err = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * out.dydt);
      const Vec scale = (tol.abs + tol.rel * y.cwiseAbs().cwiseMax(out.y.cwiseAbs()).array()).matrix();
      error = std::sqrt((err.cwiseQuotient(scale)).squaredNorm() / static_cast<double>(y.size()));
    }
  } catch (const Error& e) {
    // An overflowing trial is just a failed attempt; shrink and retry.
    if (e.code() != ErrorCode::kNonFinite) throw;
  }
  out.error = error;

  if (std::isfinite(error) && error <= 1.0) {
    out.accepted = true;
    const double err = std::max(error, 1e-10);
    double fac = detail::kSafety * std::pow(err, -detail::kAlpha) * std::pow(control.prev_error, detail::kBeta);
    fac = std::clamp(fac, detail::kFacMin, control.last_rejected ? 1.0 : detail::kFacMax);
    out.h_next = h * fac;
    control.prev_error = err;
    control.last_rejected = false;
  } else {
    out.accepted = false;
    const double fac = std::isfinite(error)
                           ? std::max(detail::kFacMin, detail::kSafety * std::pow(error, -1.0 / 5.0))
                           : detail::kFacMin;
    out.h_next = h * std::min(fac, 1.0);
    control.last_rejected = true;
  }
  if (out.h_next < kMinStep) throw Error(ErrorCode::kStepUnderflow, "step size fell below 1e-12");
  return out;
}

template <typename Vec, typename Rhs>
AdaptiveStep<Vec> adaptive_step(Rhs&& rhs, double t, const Vec& y, double h, Tolerances tol,
                                StepControl& control) {
  const Vec k1 = rhs(t, y);
  return adaptive_step(rhs, t, y, k1, h, tol, control);
}

/// Integrates the joint system from `init` at t = 0 to cfg.t_end, storing
/// a sample every cfg.sample_every (plus t_end if it falls between samples).
/// Errors: kDiverged on non-finite state, kPhysicalityLost when the guard is
/// on and a sample drops below the floor, kStepUnderflow from the adaptive
/// stepper.
Trajectory propagate(const Params& params, const JointState& init, const IntegratorConfig& cfg);

/// Integrates dV/dt = M V + V M^T + D with a frozen drift matrix and returns
/// V(cfg.t_end).
Matrix8d propagate_frozen(const Matrix8d& m, const DiffusionMatrix<double>& d, const Matrix8d& v0,
                          const IntegratorConfig& cfg);

/// Mean field plus the upper triangle (row-major, i <= j): the 44 entries
/// that fully determine a joint state.
Eigen::Matrix<double, 44, 1> canonical_entries(const JointState& s);

}  // namespace optosync
