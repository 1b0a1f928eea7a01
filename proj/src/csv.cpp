#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <system_error>

#include "optosync/io.hpp"

namespace optosync {

namespace {

void check_sink(const std::ostream& sink) {
  if (!sink) throw Error(ErrorCode::kSinkUnavailable, "output stream is not writable");
}

const char* flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return std::signbit(x) ? "-0" : "0";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

std::size_t emit_timeseries(const Trajectory& tr, const std::vector<Metrics>& metrics, std::ostream& sink) {
  if (metrics.size() != tr.size()) throw Error(ErrorCode::kInvalidArgument, "metrics do not match trajectory");
  check_sink(sink);
  sink << kTimeseriesHeader << '\n';
  for (std::size_t i = 0; i < tr.size(); ++i) {
    sink << format_number(tr.times[i]);
    for (int k = 0; k < kDim; ++k) sink << ',' << format_number(tr.states[i].y[k]);
    const Metrics& m = metrics[i];
    sink << ',' << format_number(m.s_q) << ',' << format_number(m.e_d) << ',' << format_number(m.var_q_minus) << ','
         << format_number(m.var_p_minus) << ',' << format_number(m.var_p_plus) << ',' << flag(m.physical) << '\n';
  }
  check_sink(sink);
  return tr.size();
}

std::size_t emit_sweep(const SweepResult& sr, std::ostream& sink) {
  check_sink(sink);
  sink << kSweepHeader << '\n';
  for (const auto& row : sr.rows) {
    sink << format_number(row.axis_value) << ',' << format_number(row.sq_bar) << ',' << format_number(row.ed_bar)
         << ',' << flag(row.entangled) << ',' << format_number(row.wall_seconds) << '\n';
  }
  check_sink(sink);
  return sr.rows.size();
}

std::size_t emit_summary(const std::string& name, const SteadyState& s, std::ostream& sink) {
  check_sink(sink);
  sink << kSummaryHeader << '\n'
       << name << ',' << format_number(s.window.t_start) << ',' << format_number(s.window.t_end) << ','
       << format_number(s.sq_bar) << ',' << format_number(s.ed_bar) << ',' << format_number(s.sq_min) << ','
       << format_number(s.sq_max) << ',' << format_number(s.ed_min) << ',' << format_number(s.ed_max) << ','
       << flag(s.entangled) << ',' << format_number(s.min_symplectic) << '\n';
  check_sink(sink);
  return 1;
}

std::size_t emit_oracle(const OracleReport& r, std::ostream& sink) {
  check_sink(sink);
  sink << kOracleHeader << '\n';
  std::size_t rows = 0;
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j, ++rows) {
      sink << i << ',' << j << ',' << format_number(r.ode_cov(i, j)) << ',' << format_number(r.sample_cov(i, j))
           << ',' << format_number(r.std_error(i, j)) << ',' << format_number(r.z(i, j)) << '\n';
    }
  }
  check_sink(sink);
  return rows;
}

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kSinkUnavailable, "cannot create " + dir.string() + ": " + ec.message());

  std::random_device rd;
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kSinkUnavailable, "cannot open " + tmp.string());
    writer(out);
    out.flush();
    if (!out) throw Error(ErrorCode::kSinkUnavailable, "write failed for " + path.string());
    out.close();
    fs::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::kSinkUnavailable, "cannot move into " + path.string() + ": " + ec.message());
  } catch (...) {
    fs::remove(tmp, ec);
    throw;
  }
}

}  // namespace optosync
