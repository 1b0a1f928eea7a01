#pragma once

// Two fiber-coupled optomechanical cavities in the rotating frame of the
// drive: classical mean-field equations, the linearized drift matrix of the
// fluctuations, the Markovian diffusion matrix and the Lyapunov equation for
// the fluctuation covariance.
//
// Units: hbar = k_B = 1, frequencies in units of omega_m1, time in 1/omega_m1.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "optosync/errors.hpp"
#include "optosync/types.hpp"

namespace optosync {

template <typename Scalar>
struct SystemParams {
  std::array<Scalar, 2> omega_m{};  ///< mechanical frequencies
  std::array<Scalar, 2> delta_c{};  ///< cavity detunings from the drive
  std::array<Scalar, 2> g1{};       ///< linear optomechanical coupling
  std::array<Scalar, 2> g2{};       ///< quadratic optomechanical coupling
  std::array<Scalar, 2> gamma_m{};  ///< mechanical damping
  std::array<Scalar, 2> kappa{};    ///< cavity decay
  Scalar J{};                       ///< cavity-cavity (fiber) coupling
  Scalar E{};                       ///< drive amplitude, shared by both cavities
  Scalar eta_D{};                   ///< drive modulation depth
  Scalar Omega_D{};                 ///< drive modulation frequency
  std::array<Scalar, 2> n_bar{};    ///< thermal phonon occupation

  bool operator==(const SystemParams&) const = default;
};

using Params = SystemParams<double>;

/// Classical means, stored in the same order as R:
/// (q1, p1, Re a1, Im a1, q2, p2, Re a2, Im a2).
template <typename Scalar>
struct MeanFieldState {
  Vector8<Scalar> y = Vector8<Scalar>::Zero();

  Scalar& qbar(int j) { return y[idx::block(j) + 0]; }
  Scalar& pbar(int j) { return y[idx::block(j) + 1]; }
  Scalar& alpha_re(int j) { return y[idx::block(j) + 2]; }
  Scalar& alpha_im(int j) { return y[idx::block(j) + 3]; }
  Scalar qbar(int j) const { return y[idx::block(j) + 0]; }
  Scalar pbar(int j) const { return y[idx::block(j) + 1]; }
  Scalar alpha_re(int j) const { return y[idx::block(j) + 2]; }
  Scalar alpha_im(int j) const { return y[idx::block(j) + 3]; }
  Scalar photon_number(int j) const {
    return alpha_re(j) * alpha_re(j) + alpha_im(j) * alpha_im(j);
  }

  bool all_finite() const { return y.allFinite(); }
  bool operator==(const MeanFieldState& o) const { return y == o.y; }
};

template <typename Scalar>
struct DriftMatrix {
  Matrix8<Scalar> m = Matrix8<Scalar>::Zero();
  std::array<Scalar, 2> g_eff{};      ///< G'_j = g1 - 2 g2 q
  std::array<Scalar, 2> omega_eff{};  ///< omega'_j = omega_m + 2 g2 |alpha|^2
  std::array<Scalar, 2> delta_eff{};  ///< Delta'_j = Delta_c - g1 q + g2 q^2
};

template <typename Scalar>
struct DiffusionMatrix {
  Vector8<Scalar> diagonal = Vector8<Scalar>::Zero();

  Matrix8<Scalar> dense() const { return diagonal.asDiagonal(); }
};

template <typename Scalar>
struct JointDerivative {
  Vector8<Scalar> mean;
  Matrix8<Scalar> cov;
};

/// Raw parameter record keyed by dotted field name ("omega_m.1", "J", ...).
using ParamRecord = std::map<std::string, double>;

/// Every key a complete ParamRecord must carry.
const std::vector<std::string>& param_record_keys();

/// Checks the SystemParams invariants; throws ValidationError listing every
/// violation.
void check_params(const Params& params);

/// Builds SystemParams from a raw record. Missing fields, non-finite values,
/// non-positive rates and negative occupations are all collected before
/// throwing.
Params validate_params(const ParamRecord& raw);

ParamRecord to_record(const Params& params);

/// Uncorrelated thermal mechanics and vacuum cavities:
/// diag[(2n1+1)/2, (2n1+1)/2, 1/2, 1/2, (2n2+1)/2, (2n2+1)/2, 1/2, 1/2].
template <typename Scalar>
Matrix8<Scalar> thermal_vacuum_covariance(const SystemParams<Scalar>& p) {
  Vector8<Scalar> d;
  const Scalar half(0.5);
  for (int j = 0; j < 2; ++j) {
    const Scalar mech = (Scalar(2) * p.n_bar[j] + Scalar(1)) * half;
    d.template segment<4>(idx::block(j)) << mech, mech, half, half;
  }
  return d.asDiagonal();
}

template <typename Scalar>
DriftMatrix<Scalar> drift_matrix(const SystemParams<Scalar>& p, const MeanFieldState<Scalar>& s) {
  using std::sqrt;
  DriftMatrix<Scalar> out;
  const Scalar root2 = sqrt(Scalar(2));
  for (int j = 0; j < 2; ++j) {
    const Scalar q = s.qbar(j);
    const Scalar g_eff = p.g1[j] - Scalar(2) * p.g2[j] * q;
    const Scalar omega_eff = p.omega_m[j] + Scalar(2) * p.g2[j] * s.photon_number(j);
    const Scalar delta_eff = p.delta_c[j] - p.g1[j] * q + p.g2[j] * q * q;
    const Scalar c_re = root2 * g_eff * s.alpha_re(j);
    const Scalar c_im = root2 * g_eff * s.alpha_im(j);
    out.g_eff[j] = g_eff;
    out.omega_eff[j] = omega_eff;
    out.delta_eff[j] = delta_eff;

    auto b = out.m.template block<4, 4>(idx::block(j), idx::block(j));
    b << Scalar(0), p.omega_m[j], Scalar(0), Scalar(0),
         -omega_eff, -p.gamma_m[j], c_re, c_im,
         -c_im, Scalar(0), -p.kappa[j], delta_eff,
         c_re, Scalar(0), -delta_eff, -p.kappa[j];
  }
  // M0 couples the cavity quadratures only.
  out.m(idx::kQa1, idx::kPa2) = -p.J;
  out.m(idx::kPa1, idx::kQa2) = p.J;
  out.m(idx::kQa2, idx::kPa1) = -p.J;
  out.m(idx::kPa2, idx::kQa1) = p.J;
  return out;
}

template <typename Scalar>
DiffusionMatrix<Scalar> diffusion_matrix(const SystemParams<Scalar>& p) {
  DiffusionMatrix<Scalar> out;
  for (int j = 0; j < 2; ++j) {
    out.diagonal.template segment<4>(idx::block(j))
        << Scalar(0), (Scalar(2) * p.n_bar[j] + Scalar(1)) * p.gamma_m[j], p.kappa[j], p.kappa[j];
  }
  return out;
}

template <typename Scalar>
Scalar drive_amplitude(const SystemParams<Scalar>& p, Scalar t) {
  using std::cos;
  return p.E * (Scalar(1) + p.eta_D * cos(p.Omega_D * t));
}

/// Time derivative of the classical means. Throws kNonFinite if any
/// component is not finite.
template <typename Scalar>
Vector8<Scalar> mean_field_rhs(const SystemParams<Scalar>& p, Scalar t, const MeanFieldState<Scalar>& s) {
  Vector8<Scalar> d;
  const Scalar drive = drive_amplitude(p, t);
  for (int j = 0; j < 2; ++j) {
    const int o = idx::block(j);
    const int other = idx::block(1 - j);
    const Scalar q = s.qbar(j);
    const Scalar ar = s.alpha_re(j);
    const Scalar ai = s.alpha_im(j);
    const Scalar n = ar * ar + ai * ai;

    d[o + 0] = p.omega_m[j] * s.pbar(j);
    d[o + 1] = -p.omega_m[j] * q + p.g1[j] * n - Scalar(2) * p.g2[j] * n * q - p.gamma_m[j] * s.pbar(j);

    // d(alpha)/dt = -(kappa + i Delta) alpha + i (g1 q - g2 q^2) alpha + i J alpha_other + drive
    const Scalar shift = p.delta_c[j] - p.g1[j] * q + p.g2[j] * q * q;
    d[o + 2] = -p.kappa[j] * ar + shift * ai - p.J * s.y[other + 3] + drive;
    d[o + 3] = -p.kappa[j] * ai - shift * ar + p.J * s.y[other + 2];
  }
  if (!d.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "mean-field derivative is not finite");
  }
  return d;
}

/// dV/dt = M V + V M^T + D. Exactly symmetric in floating point when V is.
template <typename Scalar>
Matrix8<Scalar> lyapunov_rhs(const Matrix8<Scalar>& m, const Matrix8<Scalar>& v, const DiffusionMatrix<Scalar>& d) {
  Matrix8<Scalar> mv = m * v;
  Matrix8<Scalar> out = mv + mv.transpose();
  out.diagonal() += d.diagonal;
  return out;
}

/// Mean-field and covariance derivatives with the drift frozen at the
/// current mean field.
template <typename Scalar>
JointDerivative<Scalar> joint_rhs(const SystemParams<Scalar>& p, Scalar t, const MeanFieldState<Scalar>& s,
                                  const Matrix8<Scalar>& v) {
  JointDerivative<Scalar> out;
  out.mean = mean_field_rhs(p, t, s);
  out.cov = lyapunov_rhs(drift_matrix(p, s).m, v, diffusion_matrix(p));
  if (!out.cov.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "covariance derivative is not finite");
  }
  return out;
}

}  // namespace optosync
