#include "optosync/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace optosync {

Metrics compute_metrics(const MeanFieldState<double>& s, const Matrix8d& v) {
  Metrics m;
  const auto epr = epr_variances(v);
  m.var_q_minus = epr.var_q_minus;
  m.var_p_minus = epr.var_p_minus;
  m.var_p_plus = epr.var_p_plus;
  m.s_q = sync_quantum(v);
  m.e_d = entanglement_product(v);
  m.entangled = is_entangled(m.e_d);
  const auto cl = classical_errors(s);
  m.q_minus_bar = cl.q_minus;
  m.p_minus_bar = cl.p_minus;
  m.q_plus_bar = cl.q_plus;
  m.p_plus_bar = cl.p_plus;
  const auto phys = physicality_check(v);
  m.physical = phys.ok;
  m.min_symplectic = phys.min_eigenvalue;
  return m;
}

TimeWindow steady_window(double t_final, double omega_drive, double span) {
  double length = span;
  if (omega_drive > 0.0) {
    const double period = 2.0 * std::numbers::pi / omega_drive;
    const double periods = std::floor(span / period);
    if (periods >= 1.0) length = periods * period;
  }
  return {t_final - length, t_final};
}

double window_average(std::span<const double> times, std::span<const double> values, double t_start,
                      double t_end) {
  if (times.size() != values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "times and values differ in length");
  }
  if (times.empty() || !(t_end > t_start)) {
    throw Error(ErrorCode::kWindowTooShort, "empty window");
  }
  // Tolerate window edges that sit on a sample up to rounding.
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
  if (t_start < times.front() - slack || t_end > times.back() + slack) {
    throw Error(ErrorCode::kWindowTooShort, "window extends beyond the series");
  }
  t_start = std::max(t_start, times.front());
  t_end = std::min(t_end, times.back());

  const auto first = std::lower_bound(times.begin(), times.end(), t_start - slack);
  const auto last = std::upper_bound(times.begin(), times.end(), t_end + slack);
  const auto inside = static_cast<std::size_t>(std::distance(first, last));
  if (inside < kMinWindowSamples) {
    throw Error(ErrorCode::kWindowTooShort,
                "window holds " + std::to_string(inside) + " samples, need " + std::to_string(kMinWindowSamples));
  }

  auto value_at = [&](double t) {
    auto hi = std::lower_bound(times.begin(), times.end(), t);
    if (hi == times.end()) return values.back();
    const auto i = static_cast<std::size_t>(std::distance(times.begin(), hi));
    if (*hi == t || i == 0) return values[i];
    const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
  };

  double integral = 0.0;
  double t_prev = t_start;
  double v_prev = value_at(t_start);
  for (auto it = std::upper_bound(times.begin(), times.end(), t_start); it != times.end() && *it < t_end; ++it) {
    const auto i = static_cast<std::size_t>(std::distance(times.begin(), it));
    integral += 0.5 * (v_prev + values[i]) * (*it - t_prev);
    t_prev = *it;
    v_prev = values[i];
  }
  integral += 0.5 * (v_prev + value_at(t_end)) * (t_end - t_prev);
  return integral / (t_end - t_start);
}

}  // namespace optosync
