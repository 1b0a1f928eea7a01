#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "optosync/integrate.hpp"
#include "optosync/measures.hpp"
#include "optosync/model.hpp"

namespace optosync {

/// How a delta_m = omega_m2 - omega_m1 sweep treats the second cavity.
enum class DetuningMode {
  kHold,    ///< Delta_c2 stays at the base value
  kComove,  ///< Delta_c2 = -omega_m2 (resonant drive follows the oscillator)
};

/// A closed interval [lo, hi] that a steady-state statistic must fall in.
/// Strict bounds (e.g. S_q > 0.85) are expressed with `strict`.
struct Target {
  std::string metric;  ///< "Sq_bar", "Ed_bar", "Ed_min", "Ed_max"
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool strict = false;

  bool contains(double x) const { return strict ? (x > lo && x < hi) : (x >= lo && x <= hi); }
  bool operator==(const Target&) const = default;
};

struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  DetuningMode detuning = DetuningMode::kHold;

  bool operator==(const SweepSpec&) const = default;
};

struct Preset {
  std::string name;
  std::string description;
  Params params;
  IntegratorConfig integrator;
  std::vector<Target> expected;
  std::optional<SweepSpec> sweep;
};

/// fig2_linear, fig3_quadratic, fig4a_thermal, fig4b_detuning.
const std::vector<Preset>& preset_catalog();
/// Throws kUnknownPreset.
const Preset& find_preset(const std::string& name);

/// Windowed statistics over the steady-state window.
struct SteadyState {
  TimeWindow window;
  double sq_bar{};
  double ed_bar{};
  double sq_min{}, sq_max{};
  double ed_min{}, ed_max{};
  bool entangled{};  ///< ed_bar < 1/4
  double min_symplectic{};
  bool final_physical{};
};

struct TargetCheck {
  Target target;
  double value{};
  bool passed{};
};

struct PresetRun {
  Trajectory trajectory;
  std::vector<Metrics> metrics;
  SteadyState steady;
  std::vector<TargetCheck> checks;

  bool targets_met() const;
};

std::vector<Metrics> metrics_series(const Trajectory& tr);
SteadyState steady_state(const Trajectory& tr, const std::vector<Metrics>& metrics, double omega_drive);

/// propagate -> per-sample measures -> window averages -> target checks.
PresetRun run_preset(const Preset& preset);
PresetRun run_preset(const Preset& preset, const JointState& init);

struct SweepRow {
  double axis_value{};
  double sq_bar{};
  double ed_bar{};
  bool entangled{};
  double wall_seconds{};
  bool final_physical{};
  double min_symplectic{};  ///< over every sample of the run
  double max_symmetry_defect{};
  double sq_peak{};           ///< largest S_q over every sample of the run
  double sq_peak_physical{};  ///< same, over samples that pass the physicality check

  bool same_physics(const SweepRow& o) const {
    return axis_value == o.axis_value && sq_bar == o.sq_bar && ed_bar == o.ed_bar && entangled == o.entangled &&
           final_physical == o.final_physical && min_symplectic == o.min_symplectic;
  }
};

struct EntanglementThreshold {
  double first_grid_value{};  ///< first axis value with Ed_bar >= 1/4
  double interpolated{};      ///< linear crossing of Ed_bar = 1/4 between grid points
};

struct SweepResult {
  std::string axis_name;
  std::vector<double> axis_values;
  std::vector<SweepRow> rows;
  std::optional<EntanglementThreshold> threshold;
};

/// Returns a copy of `base` with `axis` set to `value`. Axis names:
/// any SystemParams field ("J", "E", "eta_D", "Omega_D"; per-oscillator
/// fields bare for both oscillators or suffixed ".1"/".2"), "delta_m"
/// (omega_m2 = omega_m1 + value, Delta_c2 per `detuning`) and "g2_ratio"
/// (g2_j = value * g1_j). Throws kUnknownAxis.
Params apply_axis(const Params& base, const std::string& axis, double value,
                  DetuningMode detuning = DetuningMode::kHold);

bool is_known_axis(const std::string& axis);

/// One propagation per axis value, run concurrently (at most
/// worker_count() at a time); rows come back in axis order.
SweepResult sweep_axis(const Preset& base, const std::string& axis, const std::vector<double>& values,
                       DetuningMode detuning = DetuningMode::kHold);

/// n_bar sweep (both oscillators) plus the entanglement-loss threshold.
SweepResult sweep_thermal(const Preset& base, const std::vector<double>& n_values);

/// First axis value whose Ed_bar >= 1/4, and the interpolated crossing.
std::optional<EntanglementThreshold> entanglement_threshold(const SweepResult& sr);

/// `count` evenly spaced values from `lo` to `hi` inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t count);

// -- Stochastic cross-check of the covariance propagation -----------------

enum class OracleScheme {
  /// Drift advanced by the RK4 propagator of the linear fluctuation system,
  /// Gaussian increments with covariance D h.
  kRk4Drift,
  /// Plain Euler-Maruyama: R += M R h + sqrt(h) L xi.
  kEulerMaruyama,
};

struct OracleOptions {
  double step = 1e-3;
  OracleScheme scheme = OracleScheme::kRk4Drift;
  /// Tolerances of the deterministic reference propagation.
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

struct OracleReport {
  Matrix8d sample_cov = Matrix8d::Zero();
  Matrix8d ode_cov = Matrix8d::Zero();
  Matrix8d std_error = Matrix8d::Zero();
  Matrix8d z = Matrix8d::Zero();  ///< (sample - ode) / std_error
  double max_abs_z{};
  std::size_t ensemble{};
  std::size_t steps{};
  double horizon{};

  bool agrees_within(double k) const { return max_abs_z <= k; }
};

inline constexpr std::size_t kMinOracleEnsemble = 1000;
inline constexpr double kMaxOracleHorizon = 50.0;

/// Simulates R' = M(t) R + N(t) around the mean-field path for `ensemble`
/// members started from N(0, init.cov) and compares the sample covariance at
/// `horizon` with the ODE result. Deterministic for a given seed and
/// independent of the thread count.
OracleReport stochastic_oracle(const Params& params, double horizon, std::size_t ensemble, std::uint64_t seed,
                               const OracleOptions& options = {});
OracleReport stochastic_oracle(const Params& params, const JointState& init, double horizon,
                               std::size_t ensemble, std::uint64_t seed, const OracleOptions& options = {});

/// Ensemble of R_{k+1} = Phi_k R_k + sqrt(h) diag(sqrt(noise)) xi_k.
struct LinearSdeEnsemble {
  Matrix8d sample_cov = Matrix8d::Zero();
  Matrix8d std_error = Matrix8d::Zero();
  Matrix8d initial_sample_cov = Matrix8d::Zero();
  Matrix8d propagator = Matrix8d::Identity();  ///< product of the per-step drift maps
};

/// Per-step drift maps for a step of size h from the mean-field stages.
std::vector<Matrix8d> drift_maps(const Params& params, const MeanFieldState<double>& mean0, double horizon,
                                 double step, OracleScheme scheme);

LinearSdeEnsemble run_linear_sde(const std::vector<Matrix8d>& maps, const Vector8d& noise_diag, double step,
                                 const Matrix8d& v0, std::size_t ensemble, std::uint64_t seed);

// -- Concurrency -----------------------------------------------------------

/// Worker cap: OPTOSYNC_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned worker_count();

}  // namespace optosync
