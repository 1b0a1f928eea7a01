#pragma once

// Run configuration documents, CSV emission and the command-line driver.
//
// Configuration grammar (one entry per line):
//
//   document := { line }
//   line     := blank | comment | key "=" value
//   comment  := "#" ...
//   key      := segment { "." segment }
//
// Whitespace around keys and values is ignored; a key may appear once.
// Recognised keys:
//
//   preset                    catalog name (exclusive with params.*)
//   params.<field>[.1|.2]     omega_m delta_c g1 g2 gamma_m kappa n_bar
//                             (bare name sets both oscillators)
//   params.<scalar>           J E eta_D Omega_D
//   integrator.mode           fixed | adaptive
//   integrator.h0 .rel_tol .abs_tol .t_end .sample_every
//   integrator.layout         full | packed
//   integrator.physicality_guard  true | false
//   integrator.physicality_floor
//   output.dir                output directory (default "out")
//   output.trajectory / output.metrics / output.sweep   true | false
//   sweep.axis                see apply_axis
//   sweep.values              comma-separated list
//   sweep.range               lo:hi:count (exclusive with sweep.values)
//   sweep.detuning            hold | comove
//   oracle.horizon .ensemble .seed .step
//   oracle.scheme             rk4 | euler

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "optosync/experiments.hpp"
#include "optosync/integrate.hpp"
#include "optosync/model.hpp"

namespace optosync {

struct OracleSettings {
  double horizon = 20.0;
  std::size_t ensemble = 10000;
  std::uint64_t seed = 1;
  double step = 1e-3;
  OracleScheme scheme = OracleScheme::kRk4Drift;

  bool operator==(const OracleSettings&) const = default;
};

struct RunConfig {
  /// Preset name, or inline parameters.
  std::variant<std::string, Params> source;
  /// Resolved parameters (catalog values for a preset).
  Params params;
  IntegratorConfig integrator;
  std::optional<SweepSpec> sweep;
  OracleSettings oracle;
  std::string output_dir = "out";
  bool emit_trajectory = true;
  bool emit_metrics = true;
  bool emit_sweep = true;

  bool uses_preset() const { return std::holds_alternative<std::string>(source); }
  /// Preset built from this configuration (name "inline" for inline params).
  Preset as_preset() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a configuration document. Throws ValidationError
/// (kSyntaxError, kUnknownKey, kConflictingSource, parameter violations) or
/// Error(kUnknownPreset).
RunConfig parse_config(std::string_view text);

/// Canonical document for `cfg`; parse_config(emit_config(cfg)) == cfg.
std::string emit_config(const RunConfig& cfg);

/// Shortest round-trip scientific representation.
std::string format_number(double x);

inline constexpr std::string_view kTimeseriesHeader =
    "t,qbar1,pbar1,re_a1,im_a1,qbar2,pbar2,re_a2,im_a2,Sq,Ed,var_q_minus,var_p_minus,var_p_plus,phys_ok";
inline constexpr std::string_view kSweepHeader = "axis,Sq_bar,Ed_bar,entangled,wall_seconds";
inline constexpr std::string_view kSummaryHeader =
    "preset,window_start,window_end,Sq_bar,Ed_bar,Sq_min,Sq_max,Ed_min,Ed_max,entangled,min_symplectic";
inline constexpr std::string_view kOracleHeader = "i,j,ode,sample,std_error,z";

/// Writes header + one row per sample; returns the number of data rows.
/// Throws kSinkUnavailable if the stream fails.
std::size_t emit_timeseries(const Trajectory& tr, const std::vector<Metrics>& metrics, std::ostream& sink);
std::size_t emit_sweep(const SweepResult& sr, std::ostream& sink);
std::size_t emit_summary(const std::string& name, const SteadyState& s, std::ostream& sink);
std::size_t emit_oracle(const OracleReport& r, std::ostream& sink);

/// Writes through a temporary file in the same directory and renames it
/// over `path` on success, so a failure never leaves a partial file.
/// Throws kSinkUnavailable.
void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

/// Command-line entry point. Exit codes: 0 success, 1 invalid input,
/// 2 numerical failure (including an oracle disagreement beyond 4 standard
/// errors).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace optosync
