#include <cmath>
#include <random>

#include "optosync/experiments.hpp"
#include "optosync/parallel.hpp"

namespace optosync {

namespace {

// Members per RNG substream. Fixed so results do not depend on threading.
constexpr std::size_t kBlock = 64;

using Block = Eigen::Matrix<double, kDim, Eigen::Dynamic>;

Matrix8d matrix_sqrt_psd(const Matrix8d& v) {
  Eigen::SelfAdjointEigenSolver<Matrix8d> es(0.5 * (v + v.transpose()));
  const Vector8d roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal();
}

}  // namespace

std::vector<Matrix8d> drift_maps(const Params& params, const MeanFieldState<double>& mean0, double horizon,
                                 double step, OracleScheme scheme) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(horizon / step)));
  const double h = horizon / static_cast<double>(n);
  const Matrix8d id = Matrix8d::Identity();
  std::vector<Matrix8d> maps;
  maps.reserve(n);

  MeanFieldState<double> s = mean0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * h;
    // RK4 stages of the mean field; the fluctuation drift is evaluated on
    // the same stages so both advance consistently.
    MeanFieldState<double> s2, s3, s4;
    const Vector8d k1 = mean_field_rhs(params, t, s);
    s2.y = s.y + 0.5 * h * k1;
    const Vector8d k2 = mean_field_rhs(params, t + 0.5 * h, s2);
    s3.y = s.y + 0.5 * h * k2;
    const Vector8d k3 = mean_field_rhs(params, t + 0.5 * h, s3);
    s4.y = s.y + h * k3;
    const Vector8d k4 = mean_field_rhs(params, t + h, s4);

    const Matrix8d m1 = drift_matrix(params, s).m;
    if (scheme == OracleScheme::kEulerMaruyama) {
      maps.push_back(id + h * m1);
    } else {
      const Matrix8d a1 = m1;
      const Matrix8d a2 = drift_matrix(params, s2).m * (id + 0.5 * h * a1);
      const Matrix8d a3 = drift_matrix(params, s3).m * (id + 0.5 * h * a2);
      const Matrix8d a4 = drift_matrix(params, s4).m * (id + h * a3);
      maps.push_back(id + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4));
    }
    s.y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!s.all_finite()) throw Error(ErrorCode::kDiverged, "mean field diverged in oracle path");
  }
  return maps;
}

LinearSdeEnsemble run_linear_sde(const std::vector<Matrix8d>& maps, const Vector8d& noise_diag, double step,
                                 const Matrix8d& v0, std::size_t ensemble, std::uint64_t seed) {
  if (ensemble < 2) throw Error(ErrorCode::kInvalidArgument, "ensemble needs at least two members");
  const Matrix8d init_root = matrix_sqrt_psd(v0);
  const Vector8d noise_root = (noise_diag.cwiseMax(0.0) * step).cwiseSqrt();

  Block initial(kDim, static_cast<Eigen::Index>(ensemble));
  Block final_state(kDim, static_cast<Eigen::Index>(ensemble));
  const std::size_t blocks = (ensemble + kBlock - 1) / kBlock;

  parallel_for(blocks, worker_count(), [&](std::size_t b) {
    const auto first = static_cast<Eigen::Index>(b * kBlock);
    const auto width = static_cast<Eigen::Index>(std::min(kBlock, ensemble - b * kBlock));
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    auto draw = [&](Block& xi) {
      for (Eigen::Index c = 0; c < xi.cols(); ++c)
        for (int r = 0; r < kDim; ++r) xi(r, c) = normal(rng);
    };

    Block xi(kDim, width);
    draw(xi);
    Block r = init_root * xi;
    initial.middleCols(first, width) = r;

    Block next(kDim, width);
    for (const auto& phi : maps) {
      next.noalias() = phi * r;
      for (Eigen::Index c = 0; c < width; ++c)
        for (int k = 0; k < kDim; ++k)
          if (noise_root[k] != 0.0) next(k, c) += noise_root[k] * normal(rng);
      r.swap(next);
    }
    final_state.middleCols(first, width) = r;
  });

  const double n = static_cast<double>(ensemble);
  auto covariance = [n](const Block& x) {
    const Block centered = x.colwise() - x.rowwise().mean();
    return Matrix8d(centered * centered.transpose() / (n - 1.0));
  };

  LinearSdeEnsemble out;
  out.initial_sample_cov = covariance(initial);
  out.sample_cov = covariance(final_state);
  const Block centered = final_state.colwise() - final_state.rowwise().mean();
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      const Eigen::RowVectorXd prod = centered.row(i).cwiseProduct(centered.row(j));
      const double mean = prod.mean();
      const double var = (prod.array() - mean).square().sum() / (n - 1.0);
      out.std_error(i, j) = out.std_error(j, i) = std::sqrt(var / n);
    }
  }
  for (const auto& phi : maps) out.propagator = phi * out.propagator;
  return out;
}

OracleReport stochastic_oracle(const Params& params, double horizon, std::size_t ensemble, std::uint64_t seed,
                               const OracleOptions& options) {
  return stochastic_oracle(params, default_initial_state(params), horizon, ensemble, seed, options);
}

OracleReport stochastic_oracle(const Params& params, const JointState& init, double horizon,
                               std::size_t ensemble, std::uint64_t seed, const OracleOptions& options) {
  check_params(params);
  std::vector<Violation> v;
  if (ensemble < kMinOracleEnsemble) v.push_back({ErrorCode::kInvalidArgument, "oracle.ensemble", ">= 1000 required"});
  if (!(horizon > 0.0 && horizon <= kMaxOracleHorizon)) {
    v.push_back({ErrorCode::kInvalidArgument, "oracle.horizon", "must lie in (0, 50]"});
  }
  if (!(options.step > 0.0 && options.step <= horizon)) {
    v.push_back({ErrorCode::kInvalidArgument, "oracle.step", "must lie in (0, horizon]"});
  }
  if (!v.empty()) throw ValidationError(std::move(v));

  const auto maps = drift_maps(params, init.mean, horizon, options.step, options.scheme);
  const auto sde = run_linear_sde(maps, diffusion_matrix(params).diagonal, horizon / static_cast<double>(maps.size()),
                                  init.cov, ensemble, seed);

  IntegratorConfig cfg;
  cfg.t_end = horizon;
  cfg.h0 = std::min(1e-3, horizon);
  cfg.sample_every = horizon;
  cfg.rel_tol = options.rel_tol;
  cfg.abs_tol = options.abs_tol;
  cfg.physicality_guard = false;
  const Trajectory ode = propagate(params, init, cfg);

  OracleReport r;
  r.sample_cov = sde.sample_cov;
  r.ode_cov = ode.covariances.back();
  r.std_error = sde.std_error;
  r.ensemble = ensemble;
  r.steps = maps.size();
  r.horizon = horizon;
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      const double diff = r.sample_cov(i, j) - r.ode_cov(i, j);
      double z = 0.0;
      if (r.std_error(i, j) > 0.0) {
        z = diff / r.std_error(i, j);
      } else if (std::abs(diff) > 1e-12 * std::max(1.0, std::abs(r.ode_cov(i, j)))) {
        z = std::copysign(std::numeric_limits<double>::infinity(), diff);
      }
      r.z(i, j) = r.z(j, i) = z;
      r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
    }
  }
  return r;
}

}  // namespace optosync
