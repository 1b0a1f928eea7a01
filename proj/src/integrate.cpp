#include "optosync/integrate.hpp"

#include <cmath>
#include <sstream>

#include "optosync/measures.hpp"

namespace optosync {

namespace {

// Flat-state encodings of (mean field, V).
struct FullLayout {
  static constexpr int kSize = kDim + kDim * kDim;
  using Vec = Eigen::Matrix<double, kSize, 1>;

  static Vec pack(const Vector8d& mean, const Matrix8d& v) {
    Vec y;
    y.head<kDim>() = mean;
    y.tail<kDim * kDim>() = Eigen::Map<const Eigen::Matrix<double, kDim * kDim, 1>>(v.data());
    return y;
  }
  static void unpack(const Vec& y, Vector8d& mean, Matrix8d& v) {
    mean = y.head<kDim>();
    v = Eigen::Map<const Matrix8d>(y.data() + kDim);
  }
  static double symmetrize(Vec& y) {
    Eigen::Map<Matrix8d> v(y.data() + kDim);
    const double defect = symmetry_defect<double>(v);
    const Matrix8d sym = 0.5 * (v + v.transpose());
    v = sym;
    return defect;
  }
};

struct PackedLayout {
  static constexpr int kSize = kDim + kDim * (kDim + 1) / 2;
  using Vec = Eigen::Matrix<double, kSize, 1>;

  static Vec pack(const Vector8d& mean, const Matrix8d& v) {
    Vec y;
    y.head<kDim>() = mean;
    int k = kDim;
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) y[k++] = v(i, j);
    return y;
  }
  static void unpack(const Vec& y, Vector8d& mean, Matrix8d& v) {
    mean = y.head<kDim>();
    int k = kDim;
    for (int i = 0; i < kDim; ++i)
      for (int j = i; j < kDim; ++j) v(i, j) = v(j, i) = y[k++];
  }
  static double symmetrize(Vec&) { return 0.0; }
};

std::vector<double> sample_times(const IntegratorConfig& cfg) {
  std::vector<double> times;
  const auto count = static_cast<std::size_t>(std::floor(cfg.t_end / cfg.sample_every + 1e-9));
  times.reserve(count + 2);
  for (std::size_t k = 0; k <= count; ++k) times.push_back(static_cast<double>(k) * cfg.sample_every);
  if (cfg.t_end - times.back() > 1e-9 * cfg.t_end) times.push_back(cfg.t_end);
  return times;
}

std::string at_time(double t) {
  std::ostringstream os;
  os << " at t = " << t;
  return os.str();
}

template <typename Layout, typename Rhs, typename OnStep, typename OnSample>
void drive(Rhs&& rhs, typename Layout::Vec y, const IntegratorConfig& cfg, Trajectory& tr, OnStep&& on_step,
           OnSample&& on_sample) {
  using Vec = typename Layout::Vec;
  const auto times = sample_times(cfg);
  on_sample(times.front(), y);

  if (cfg.mode == StepMode::kFixed) {
    for (std::size_t k = 1; k < times.size(); ++k) {
      const double span = times[k] - times[k - 1];
      const auto n = static_cast<int>(std::max(1.0, std::round(span / cfg.h0)));
      const double h = span / n;
      for (int s = 0; s < n; ++s) {
        y = rk4_step(rhs, times[k - 1] + s * h, y, h);
        tr.max_symmetry_defect = std::max(tr.max_symmetry_defect, Layout::symmetrize(y));
        ++tr.accepted_steps;
        on_step(times[k - 1] + (s + 1) * h, y);
      }
      on_sample(times[k], y);
    }
    return;
  }

  const Tolerances tol{cfg.rel_tol, cfg.abs_tol};
  StepControl control;
  double t = 0.0;
  double h = cfg.h0;
  Vec dydt = rhs(t, y);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double target = times[k];
    while (t < target) {
      const double remaining = target - t;
      const bool last = h >= remaining * (1.0 - 1e-12);
      const double h_try = last ? remaining : h;
      auto step = adaptive_step(rhs, t, y, dydt, h_try, tol, control);
      if (!step.accepted) {
        ++tr.rejected_steps;
        h = step.h_next;
        continue;
      }
      ++tr.accepted_steps;
      t = last ? target : t + h_try;
      y = step.y;
      const double defect = Layout::symmetrize(y);
      tr.max_symmetry_defect = std::max(tr.max_symmetry_defect, defect);
      on_step(t, y);
      // The FSAL derivative is only exact when symmetrization changed nothing.
      dydt = defect == 0.0 ? step.dydt : rhs(t, y);
      // A step shortened to land on a sample says nothing about the scale.
      h = last ? std::max(h, step.h_next) : step.h_next;
    }
    on_sample(target, y);
  }
}

template <typename Layout>
Trajectory propagate_impl(const Params& params, const JointState& init, const IntegratorConfig& cfg) {
  using Vec = typename Layout::Vec;
  Trajectory tr;
  auto rhs = [&params](double t, const Vec& y) -> Vec {
    MeanFieldState<double> s;
    Matrix8d v;
    Layout::unpack(y, s.y, v);
    const auto d = joint_rhs(params, t, s, v);
    return Layout::pack(d.mean, d.cov);
  };
  auto guard = [&](double t, double min_eigenvalue) {
    if (cfg.physicality_guard && min_eigenvalue < cfg.physicality_floor) {
      throw Error(ErrorCode::kPhysicalityLost,
                  "min eigenvalue of V + i/2 Omega = " + std::to_string(min_eigenvalue) + at_time(t));
    }
  };
  auto on_step = [&](double t, const Vec& y) {
    if (!y.allFinite()) throw Error(ErrorCode::kDiverged, "non-finite state" + at_time(t));
    if (!cfg.physicality_guard) return;
    MeanFieldState<double> s;
    Matrix8d v;
    Layout::unpack(y, s.y, v);
    guard(t, physicality_check(v).min_eigenvalue);
  };
  auto on_sample = [&](double t, const Vec& y) {
    if (!y.allFinite()) throw Error(ErrorCode::kDiverged, "non-finite state" + at_time(t));
    MeanFieldState<double> s;
    Matrix8d v;
    Layout::unpack(y, s.y, v);
    const auto phys = physicality_check(v);
    guard(t, phys.min_eigenvalue);
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.covariances.push_back(v);
    tr.min_symplectic.push_back(phys.min_eigenvalue);
  };

  const auto n_samples = sample_times(cfg).size();
  tr.times.reserve(n_samples);
  tr.states.reserve(n_samples);
  tr.covariances.reserve(n_samples);
  tr.min_symplectic.reserve(n_samples);

  Matrix8d v0 = 0.5 * (init.cov + init.cov.transpose());
  try {
    drive<Layout>(rhs, Layout::pack(init.mean.y, v0), cfg, tr, on_step, on_sample);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNonFinite) {
      const double t = tr.times.empty() ? 0.0 : tr.times.back();
      throw Error(ErrorCode::kDiverged, std::string(e.what()) + " after t = " + std::to_string(t));
    }
    throw;
  }
  return tr;
}

}  // namespace

void check_config(const IntegratorConfig& cfg) {
  std::vector<Violation> v;
  auto require = [&](bool ok, const char* field, const char* msg) {
    if (!ok) v.push_back({ErrorCode::kInvalidArgument, field, msg});
  };
  require(cfg.h0 > 0.0 && std::isfinite(cfg.h0), "integrator.h0", "must be > 0");
  require(cfg.t_end > 0.0 && std::isfinite(cfg.t_end), "integrator.t_end", "must be > 0");
  require(cfg.rel_tol > 0.0, "integrator.rel_tol", "must be > 0");
  require(cfg.abs_tol > 0.0, "integrator.abs_tol", "must be > 0");
  require(std::isfinite(cfg.sample_every) && cfg.sample_every >= cfg.h0, "integrator.sample_every",
          "must be >= h0");
  require(std::isfinite(cfg.physicality_floor), "integrator.physicality_floor", "must be finite");
  if (!v.empty()) throw ValidationError(std::move(v));
}

JointState default_initial_state(const Params& params) {
  return {MeanFieldState<double>{}, thermal_vacuum_covariance(params)};
}

Trajectory propagate(const Params& params, const JointState& init, const IntegratorConfig& cfg) {
  check_config(cfg);
  if (!init.mean.all_finite() || !init.cov.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "initial state is not finite");
  }
  return cfg.layout == CovarianceLayout::kPacked ? propagate_impl<PackedLayout>(params, init, cfg)
                                                 : propagate_impl<FullLayout>(params, init, cfg);
}

Matrix8d propagate_frozen(const Matrix8d& m, const DiffusionMatrix<double>& d, const Matrix8d& v0,
                          const IntegratorConfig& cfg) {
  check_config(cfg);
  using Vec = PackedLayout::Vec;
  auto rhs = [&](double, const Vec& y) -> Vec {
    Vector8d unused;
    Matrix8d v;
    PackedLayout::unpack(y, unused, v);
    return PackedLayout::pack(Vector8d::Zero(), lyapunov_rhs(m, v, d));
  };
  Trajectory scratch;
  Vec last = PackedLayout::pack(Vector8d::Zero(), v0);
  IntegratorConfig c = cfg;
  c.sample_every = std::max(cfg.h0, cfg.t_end);
  drive<PackedLayout>(
      rhs, last, c, scratch, [](double, const Vec&) {}, [&](double, const Vec& y) { last = y; });
  Vector8d unused;
  Matrix8d v;
  PackedLayout::unpack(last, unused, v);
  return v;
}

Eigen::Matrix<double, 44, 1> canonical_entries(const JointState& s) {
  return PackedLayout::pack(s.mean.y, s.cov);
}

}  // namespace optosync
