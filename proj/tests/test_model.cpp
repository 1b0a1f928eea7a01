#include <doctest.h>

#include <cmath>
#include <random>

#include "optosync/experiments.hpp"
#include "optosync/model.hpp"

using namespace optosync;

namespace {

Params fig2() { return find_preset("fig2_linear").params; }

ParamRecord fig2_record() { return to_record(fig2()); }

MeanFieldState<double> state_with_alpha(double re, double im) {
  MeanFieldState<double> s;
  s.y.setZero();
  s.y[idx::kQa1] = s.y[idx::kQa2] = re;
  s.y[idx::kPa1] = s.y[idx::kPa2] = im;
  return s;
}

}  // namespace

TEST_CASE("validate_params accepts the linear-coupling set") {
  const Params p = validate_params(fig2_record());
  CHECK(p == fig2());
  CHECK(p.J == 0.04);
  CHECK(p.kappa[1] == 0.15);
}

TEST_CASE("validate_params rejects a zero cavity decay") {
  auto rec = fig2_record();
  rec["kappa.1"] = 0.0;
  try {
    validate_params(rec);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.has(ErrorCode::kNonPositiveRate));
  }
}

TEST_CASE("validate_params rejects negative occupation and reports every violation") {
  auto rec = fig2_record();
  rec["n_bar.1"] = -1.0;
  rec["gamma_m.2"] = -0.1;
  rec.erase("J");
  try {
    validate_params(rec);
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.has(ErrorCode::kNegativeOccupation));
    CHECK(e.has(ErrorCode::kNonPositiveRate));
    CHECK(e.has(ErrorCode::kMissingField));
  }
}

TEST_CASE("validate_params rejects non-finite values") {
  auto rec = fig2_record();
  rec["E"] = std::nan("");
  CHECK_THROWS_AS(validate_params(rec), ValidationError);
}

TEST_CASE("drift matrix mechanical row without quadratic coupling") {
  const Params p = fig2();
  const auto d = drift_matrix(p, state_with_alpha(1.0, 0.0));
  const auto& m = d.m;
  CHECK(m(1, 0) == -p.omega_m[0]);
  CHECK(m(1, 1) == -p.gamma_m[0]);
  CHECK(m(1, 2) == doctest::Approx(std::sqrt(2.0) * p.g1[0]));
  CHECK(m(1, 3) == 0.0);
}

TEST_CASE("drift matrix cross-cavity block carries only the fiber coupling") {
  const Params p = fig2();
  const auto m = drift_matrix(p, state_with_alpha(3.0, -2.0)).m;
  CHECK(m(2, 7) == -0.04);
  CHECK(m(3, 6) == 0.04);
  CHECK(m(6, 3) == -0.04);
  CHECK(m(7, 2) == 0.04);
  int nonzero = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 4; j < 8; ++j) {
      nonzero += m(i, j) != 0.0;
      nonzero += m(j, i) != 0.0;
    }
  }
  CHECK(nonzero == 4);
}

TEST_CASE("effective frequency with quadratic coupling") {
  Params p = fig2();
  p.g2 = {5e-5, 5e-5};
  p.omega_m = {1.0, 1.0};
  const auto d = drift_matrix(p, state_with_alpha(100.0, 0.0));
  CHECK(d.omega_eff[0] == doctest::Approx(2.0));
  CHECK(d.m(1, 0) == doctest::Approx(-2.0));
  CHECK(d.m(0, 1) == 1.0);
}

TEST_CASE("effective coupling and detuning follow the displacement") {
  Params p = fig2();
  p.g2 = {1e-3, 2e-3};
  MeanFieldState<double> s = state_with_alpha(2.0, 1.0);
  s.y[idx::kQ1] = 3.0;
  s.y[idx::kQ2] = -1.0;
  const auto d = drift_matrix(p, s);
  CHECK(d.g_eff[0] == doctest::Approx(0.005 - 2e-3 * 3.0));
  CHECK(d.g_eff[1] == doctest::Approx(0.005 + 4e-3));
  CHECK(d.delta_eff[0] == doctest::Approx(-1.0 - 0.015 + 9e-3));
  CHECK(d.m(2, 3) == doctest::Approx(d.delta_eff[0]));
  CHECK(d.m(3, 2) == doctest::Approx(-d.delta_eff[0]));
  CHECK(d.m(2, 0) == doctest::Approx(-std::sqrt(2.0) * d.g_eff[0] * 1.0));
  CHECK(d.m(3, 0) == doctest::Approx(std::sqrt(2.0) * d.g_eff[0] * 2.0));
}

TEST_CASE("diffusion matrix") {
  CHECK(diffusion_matrix(fig2()).diagonal.isApprox((Vector8d() << 0, 0.005, 0.15, 0.15, 0, 0.005, 0.15, 0.15).finished()));
  Params hot = fig2();
  hot.n_bar = {5.0, 5.0};
  const auto d = diffusion_matrix(hot);
  CHECK(d.diagonal[1] == doctest::Approx(0.055));
  CHECK(d.diagonal[5] == doctest::Approx(0.055));
  CHECK(d.dense().isDiagonal());
}

TEST_CASE("mean-field free oscillator") {
  Params p = fig2();
  p.E = 0.0;
  p.J = 0.0;
  p.g1 = {0.0, 0.0};
  p.g2 = {0.0, 0.0};
  MeanFieldState<double> s;
  s.y.setZero();
  s.y[idx::kQ1] = 1.0;
  const Vector8d d = mean_field_rhs(p, 0.0, s);
  CHECK(d[idx::kQ1] == 0.0);
  CHECK(d[idx::kP1] == -p.omega_m[0]);
}

TEST_CASE("mean-field cavity fixed point E/(kappa + i Delta)") {
  Params p = fig2();
  p.eta_D = 0.0;
  p.J = 0.0;
  p.g1 = {0.0, 0.0};
  p.g2 = {0.0, 0.0};
  for (double delta : {0.0, -1.0, 0.7}) {
    p.delta_c = {delta, delta};
    const std::complex<double> a = p.E / std::complex<double>(p.kappa[0], delta);
    const Vector8d d = mean_field_rhs(p, 1.3, state_with_alpha(a.real(), a.imag()));
    CHECK(d.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("drive is at full modulation at t = 0") {
  const Params p = fig2();
  CHECK(drive_amplitude(p, 0.0) == doctest::Approx(2.0 * p.E));
  CHECK(drive_amplitude(p, M_PI) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("joint_rhs: vacuum is a fixed point of pure decay") {
  const double kappa = 0.3;
  const Matrix8d m = -kappa * Matrix8d::Identity();
  DiffusionMatrix<double> d;
  d.diagonal = Vector8d::Constant(2.0 * kappa * 0.5);
  const Matrix8d v = 0.5 * Matrix8d::Identity();
  CHECK(lyapunov_rhs(m, v, d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lyapunov_rhs is exactly symmetric and linear in V") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  const Params p = fig2();
  auto s = state_with_alpha(20.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    for (int k = 0; k < kDim; ++k) s.y[k] = 10.0 * n(rng);
    Matrix8d a = Matrix8d::NullaryExpr([&](Eigen::Index, Eigen::Index) { return n(rng); });
    Matrix8d b = Matrix8d::NullaryExpr([&](Eigen::Index, Eigen::Index) { return n(rng); });
    a = (a + a.transpose()).eval();
    b = (b + b.transpose()).eval();
    const auto j = joint_rhs(p, 0.2, s, a);
    CHECK((j.cov - j.cov.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const Matrix8d m = drift_matrix(p, s).m;
    DiffusionMatrix<double> zero;
    zero.diagonal.setZero();
    const Matrix8d lin = lyapunov_rhs(m, Matrix8d(2.0 * a + b), zero);
    const Matrix8d sum = 2.0 * lyapunov_rhs(m, a, zero) + lyapunov_rhs(m, b, zero);
    CHECK((lin - sum).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + lin.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("decoupled blocks reduce to independent single-cavity equations") {
  Params p = fig2();
  p.J = 0.0;
  MeanFieldState<double> s = state_with_alpha(5.0, -3.0);
  s.y[idx::kQ1] = 0.2;
  s.y[idx::kP2] = -0.4;
  Matrix8d v = thermal_vacuum_covariance(p);
  v(0, 1) = v(1, 0) = 0.1;
  const auto full = joint_rhs(p, 0.0, s, v);
  CHECK(full.cov.block<4, 4>(0, 4).cwiseAbs().maxCoeff() == 0.0);

  const Matrix8d m = drift_matrix(p, s).m;
  const Eigen::Matrix4d m1 = m.block<4, 4>(0, 0);
  const Eigen::Matrix4d v1 = v.block<4, 4>(0, 0);
  const Eigen::Vector4d d1 = diffusion_matrix(p).diagonal.head<4>();
  Eigen::Matrix4d expect = m1 * v1 + v1 * m1.transpose();
  expect.diagonal() += d1;
  CHECK((full.cov.block<4, 4>(0, 0) - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mean_field_rhs rejects a non-finite state") {
  auto s = state_with_alpha(std::numeric_limits<double>::infinity(), 0.0);
  CHECK_THROWS_AS(mean_field_rhs(fig2(), 0.0, s), Error);
}

TEST_CASE("templates instantiate on long double") {
  SystemParams<long double> p;
  p.omega_m = {1.0L, 1.0L};
  p.delta_c = {-1.0L, -1.0L};
  p.g1 = {0.005L, 0.005L};
  p.g2 = {0.0L, 0.0L};
  p.gamma_m = {0.005L, 0.005L};
  p.kappa = {0.15L, 0.15L};
  p.J = 0.04L;
  p.E = 100.0L;
  p.eta_D = 1.0L;
  p.Omega_D = 1.0L;
  p.n_bar = {0.0L, 0.0L};
  MeanFieldState<long double> s;
  s.y.setZero();
  const auto j = joint_rhs(p, 0.0L, s, thermal_vacuum_covariance(p));
  CHECK(static_cast<double>(j.mean[idx::kQa1]) == doctest::Approx(200.0));
}
