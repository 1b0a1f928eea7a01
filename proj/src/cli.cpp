#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "optosync/io.hpp"

namespace optosync {

namespace {

namespace fs = std::filesystem;

RunConfig load_source(const std::string& source) {
  if (fs::is_regular_file(source)) {
    std::ifstream in(source);
    std::stringstream text;
    text << in.rdbuf();
    if (!in && !in.eof()) throw Error(ErrorCode::kInvalidArgument, "cannot read " + source);
    return parse_config(text.str());
  }
  const bool known = std::any_of(preset_catalog().begin(), preset_catalog().end(),
                                 [&](const Preset& p) { return p.name == source; });
  if (!known) {
    throw ValidationError({{ErrorCode::kUnknownPreset, "source", "'" + source + "' is neither a file nor a preset"}});
  }
  return parse_config("preset = " + source + "\n");
}

void print_steady(std::ostream& out, const SteadyState& s) {
  out << "window      [" << s.window.t_start << ", " << s.window.t_end << "]\n"
      << "Sq_bar      " << s.sq_bar << "  (min " << s.sq_min << ", max " << s.sq_max << ")\n"
      << "Ed_bar      " << s.ed_bar << "  (min " << s.ed_min << ", max " << s.ed_max << ")\n"
      << "entangled   " << (s.entangled ? "yes" : "no") << '\n'
      << "min eig(V + i/2 Omega) " << s.min_symplectic << '\n';
}

int cmd_run(const RunConfig& cfg, std::ostream& out) {
  const Preset preset = cfg.as_preset();
  const PresetRun run = run_preset(preset);
  const fs::path dir = cfg.output_dir;
  if (cfg.emit_trajectory) {
    write_atomically(dir / "trajectory.csv", [&](std::ostream& s) { emit_timeseries(run.trajectory, run.metrics, s); });
  }
  if (cfg.emit_metrics) {
    write_atomically(dir / "summary.csv", [&](std::ostream& s) { emit_summary(preset.name, run.steady, s); });
  }
  out << preset.name << ": " << run.trajectory.size() << " samples, " << run.trajectory.accepted_steps
      << " steps (" << run.trajectory.rejected_steps << " rejected)\n";
  print_steady(out, run.steady);
  for (const auto& c : run.checks) {
    out << (c.passed ? "target met    " : "target missed ") << c.target.metric << " = " << c.value << '\n';
  }
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) {
    err << "error: no sweep configured (set sweep.axis and sweep.values)\n";
    return 1;
  }
  const Preset preset = cfg.as_preset();
  const SweepResult sr = cfg.sweep->axis == "n_bar"
                             ? sweep_thermal(preset, cfg.sweep->values)
                             : sweep_axis(preset, cfg.sweep->axis, cfg.sweep->values, cfg.sweep->detuning);
  if (cfg.emit_sweep) {
    write_atomically(fs::path(cfg.output_dir) / "sweep.csv", [&](std::ostream& s) { emit_sweep(sr, s); });
  }
  out << std::setw(12) << sr.axis_name << std::setw(12) << "Sq_bar" << std::setw(12) << "Ed_bar" << "  entangled\n";
  for (const auto& r : sr.rows) {
    out << std::setw(12) << r.axis_value << std::setw(12) << r.sq_bar << std::setw(12) << r.ed_bar << "  "
        << (r.entangled ? "yes" : "no") << '\n';
  }
  if (sr.threshold) {
    out << "entanglement lost at " << sr.axis_name << " = " << sr.threshold->first_grid_value << " (crossing ~"
        << sr.threshold->interpolated << ")\n";
  } else {
    out << "entangled over the whole sweep\n";
  }
  return 0;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  OracleOptions opts;
  opts.step = cfg.oracle.step;
  opts.scheme = cfg.oracle.scheme;
  const OracleReport r = stochastic_oracle(cfg.params, cfg.oracle.horizon, cfg.oracle.ensemble, cfg.oracle.seed, opts);
  write_atomically(fs::path(cfg.output_dir) / "oracle.csv", [&](std::ostream& s) { emit_oracle(r, s); });
  out << "oracle: " << r.ensemble << " members, " << r.steps << " steps to t = " << r.horizon << '\n'
      << "max |z| = " << r.max_abs_z << '\n';
  if (!r.agrees_within(4.0)) {
    out << "covariance disagrees with the stochastic ensemble\n";
    return 2;
  }
  return 0;
}

void report(std::ostream& err, const ValidationError& e) {
  err << "error: invalid input\n";
  for (const auto& v : e.violations()) err << "  " << to_string(v.code) << " " << v.field << ": " << v.message << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synchronization and entanglement of two fiber-coupled optomechanical cavities"};
  app.name("optosync");
  app.require_subcommand(1);

  std::string source;
  std::string out_dir;
  std::optional<double> t_end;

  auto* run = app.add_subcommand("run", "propagate a preset or config file; writes trajectory.csv and summary.csv");
  auto* sweep = app.add_subcommand("sweep", "parameter sweep; writes sweep.csv");
  auto* oracle = app.add_subcommand("oracle", "stochastic cross-check of the covariance; writes oracle.csv");
  auto* presets = app.add_subcommand("presets", "list the preset catalog");
  auto* config = app.add_subcommand("config", "print the canonical configuration of a preset or file");

  std::optional<std::size_t> ensemble;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  for (auto* sub : {run, sweep, oracle, config}) {
    sub->add_option("source", source, "preset name or configuration file")->required();
  }
  for (auto* sub : {run, sweep, oracle}) sub->add_option("-o,--out", out_dir, "output directory");
  for (auto* sub : {run, sweep}) sub->add_option("--t-end", t_end, "integration horizon");
  oracle->add_option("--ensemble", ensemble, "ensemble size");
  oracle->add_option("--horizon", horizon, "comparison time");
  oracle->add_option("--seed", seed, "RNG seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (presets->parsed()) {
      for (const auto& p : preset_catalog()) out << std::left << std::setw(16) << p.name << p.description << '\n';
      return 0;
    }
    RunConfig cfg = load_source(source);
    if (config->parsed()) {
      out << emit_config(cfg);
      return 0;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (t_end) cfg.integrator.t_end = *t_end;
    if (ensemble) cfg.oracle.ensemble = *ensemble;
    if (horizon) cfg.oracle.horizon = *horizon;
    if (seed) cfg.oracle.seed = *seed;
    check_config(cfg.integrator);

    if (run->parsed()) return cmd_run(cfg, out);
    if (sweep->parsed()) return cmd_sweep(cfg, out, err);
    return cmd_oracle(cfg, out);
  } catch (const ValidationError& e) {
    report(err, e);
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  }
}

}  // namespace optosync
