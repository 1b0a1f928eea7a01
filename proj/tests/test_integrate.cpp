#include <doctest.h>

#include <cmath>

#include "optosync/experiments.hpp"
#include "optosync/integrate.hpp"

using namespace optosync;

namespace {

using Vec1 = Eigen::Matrix<double, 1, 1>;
using Vec2 = Eigen::Vector2d;

Vec1 scalar(double x) { return Vec1::Constant(x); }

Vec2 oscillator(double, const Vec2& y) { return {y[1], -y[0]}; }

double rk4_oscillator_error(double h, double t_end) {
  Vec2 y(1.0, 0.0);
  const int n = static_cast<int>(std::lround(t_end / h));
  for (int k = 0; k < n; ++k) y = rk4_step(oscillator, k * h, y, h);
  return std::abs(y[0] - std::cos(t_end));
}

Params fig2() { return find_preset("fig2_linear").params; }

Params bare_cavity() {
  Params p = fig2();
  p.eta_D = 0.0;
  p.J = 0.0;
  p.g1 = {0.0, 0.0};
  p.g2 = {0.0, 0.0};
  p.delta_c = {0.0, 0.0};
  return p;
}

}  // namespace

TEST_CASE("rk4_step on a constant solution") {
  const auto y = rk4_step([](double, const Vec1&) { return scalar(0.0); }, 0.0, scalar(3.0), 0.1);
  CHECK(y[0] == 3.0);
}

TEST_CASE("rk4_step on exponential decay") {
  const auto y = rk4_step([](double, const Vec1& v) { return Vec1(-v); }, 0.0, scalar(1.0), 0.1);
  CHECK(y[0] == doctest::Approx(0.90483750).epsilon(1e-9));
  CHECK(std::abs(y[0] - std::exp(-0.1)) < 1e-7);
}

TEST_CASE("rk4_step integrates cubics exactly") {
  const auto y = rk4_step([](double t, const Vec1&) { return scalar(3.0 * t * t); }, 0.5, scalar(0.125), 0.7);
  CHECK(y[0] == doctest::Approx(1.2 * 1.2 * 1.2).epsilon(1e-14));
}

TEST_CASE("rk4 fourth-order convergence ratio") {
  const double e1 = rk4_oscillator_error(0.1, 10.0);
  const double e2 = rk4_oscillator_error(0.05, 10.0);
  const double e3 = rk4_oscillator_error(0.025, 10.0);
  CHECK(e1 / e2 >= 12.0);
  CHECK(e1 / e2 <= 20.0);
  CHECK(e2 / e3 >= 12.0);
  CHECK(e2 / e3 <= 20.0);
}

TEST_CASE("adaptive_step accepts a smooth step") {
  StepControl control;
  const auto s = adaptive_step([](double, const Vec2& y) { return oscillator(0, y); }, 0.0, Vec2(1.0, 0.0), 1e-3,
                               Tolerances{1e-8, 1e-10}, control);
  CHECK(s.accepted);
  CHECK(s.error < 1.0);
  CHECK(s.h_next > 1e-3);
  CHECK(s.y[0] == doctest::Approx(std::cos(1e-3)).epsilon(1e-12));
}

TEST_CASE("adaptive_step rejects an oversized step") {
  StepControl control;
  const auto s = adaptive_step([](double, const Vec2& y) { return oscillator(0, y); }, 0.0, Vec2(1.0, 0.0), 3.0,
                               Tolerances{1e-10, 1e-12}, control);
  CHECK_FALSE(s.accepted);
  CHECK(s.h_next < 3.0);
  CHECK(control.last_rejected);
}

TEST_CASE("adaptive stepping into a finite-time blow-up underflows") {
  auto rhs = [](double, const Vec1& y) { return Vec1(y.cwiseProduct(y)); };
  StepControl control;
  Vec1 y = scalar(1.0);
  double t = 0.0, h = 1e-3;
  auto march = [&] {
    for (int i = 0; i < 1000000 && t < 2.0; ++i) {
      const auto s = adaptive_step(rhs, t, y, h, Tolerances{1e-8, 1e-10}, control);
      if (s.accepted) {
        t += h;
        y = s.y;
      }
      h = s.h_next;
    }
  };
  try {
    march();
    FAIL("expected StepUnderflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kStepUnderflow);
  }
  CHECK(t == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("adaptive_step refuses a step below the minimum") {
  StepControl control;
  CHECK_THROWS_AS(adaptive_step(oscillator, 0.0, Vec2(1.0, 0.0), 1e-13, Tolerances{}, control), Error);
}

TEST_CASE("check_config") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(check_config(cfg));
  cfg.rel_tol = 0.0;
  cfg.t_end = -1.0;
  try {
    check_config(cfg);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 2);
  }
}

TEST_CASE("propagate: driven cavity settles to E/kappa") {
  const Params p = bare_cavity();
  IntegratorConfig cfg;
  cfg.t_end = 250.0;
  cfg.sample_every = 1.0;
  const auto tr = propagate(p, default_initial_state(p), cfg);
  const auto& last = tr.states.back();
  CHECK(std::hypot(last.alpha_re(0), last.alpha_im(0)) == doctest::Approx(100.0 / 0.15).epsilon(1e-8));
  CHECK(std::hypot(last.alpha_re(1), last.alpha_im(1)) == doctest::Approx(666.667).epsilon(1e-6));
  // vacuum cavity noise is stationary under pure decay
  CHECK(tr.covariances.back()(2, 2) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("propagate: free oscillator follows cos(omega t)") {
  Params p = bare_cavity();
  p.E = 0.0;
  p.gamma_m = {1e-14, 1e-14};
  JointState init = default_initial_state(p);
  init.mean.qbar(0) = 1.0;
  IntegratorConfig cfg;
  cfg.t_end = 30.0;
  cfg.sample_every = 0.5;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  const auto tr = propagate(p, init, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    worst = std::max(worst, std::abs(tr.states[i].qbar(0) - std::cos(p.omega_m[0] * tr.times[i])));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("propagate: sample grid includes t_end") {
  const Params p = fig2();
  IntegratorConfig cfg;
  cfg.t_end = 1.05;
  const auto tr = propagate(p, default_initial_state(p), cfg);
  REQUIRE(tr.size() == 12);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times[10] == doctest::Approx(1.0));
  CHECK(tr.times.back() == 1.05);
  CHECK(tr.covariances.size() == tr.size());
  CHECK(tr.min_symplectic.size() == tr.size());
}

TEST_CASE("propagate: adaptive agrees with a fine fixed-step run through the switch-on transient") {
  const Params p = fig2();
  IntegratorConfig adaptive;
  adaptive.t_end = 20.0;
  adaptive.sample_every = 1.0;
  IntegratorConfig fixed = adaptive;
  fixed.mode = StepMode::kFixed;
  fixed.h0 = 1e-4;
  const auto a = propagate(p, default_initial_state(p), adaptive);
  const auto f = propagate(p, default_initial_state(p), fixed);
  REQUIRE(a.size() == f.size());
  CHECK(a.accepted_steps < f.accepted_steps / 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ea = canonical_entries(a.at(i));
    const auto ef = canonical_entries(f.at(i));
    CHECK((ea - ef).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + ef.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("propagate: packed and full layouts agree") {
  const Params p = find_preset("fig3_quadratic").params;
  IntegratorConfig full;
  full.t_end = 40.0;
  full.sample_every = 2.0;
  full.physicality_guard = false;
  IntegratorConfig packed = full;
  packed.layout = CovarianceLayout::kPacked;
  const auto a = propagate(p, default_initial_state(p), full);
  const auto b = propagate(p, default_initial_state(p), packed);
  REQUIRE(a.size() == b.size());
  const auto ea = canonical_entries(a.at(a.size() - 1));
  const auto eb = canonical_entries(b.at(b.size() - 1));
  CHECK((ea - eb).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + ea.cwiseAbs().maxCoeff()));
  CHECK((b.covariances.back() - b.covariances.back().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagate is deterministic and keeps V symmetric") {
  const Params p = fig2();
  IntegratorConfig cfg;
  cfg.t_end = 30.0;
  const auto a = propagate(p, default_initial_state(p), cfg);
  const auto b = propagate(p, default_initial_state(p), cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.states[i] == b.states[i]);
    CHECK(a.covariances[i] == b.covariances[i]);
  }
  CHECK(a.max_symmetry_defect <= 1e-9);
}

TEST_CASE("propagate: physicality guard fires on an unphysical start") {
  const Params p = fig2();
  JointState init = default_initial_state(p);
  init.cov = 0.3 * Matrix8d::Identity();
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  try {
    propagate(p, init, cfg);
    FAIL("expected PhysicalityLost");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPhysicalityLost);
  }
  cfg.physicality_guard = false;
  const auto tr = propagate(p, init, cfg);
  CHECK(tr.min_symplectic.front() == doctest::Approx(-0.2));
}

TEST_CASE("propagate_frozen reaches the Lyapunov fixed point") {
  const Params p = fig2();
  JointState s = default_initial_state(p);
  s.mean.alpha_re(0) = s.mean.alpha_re(1) = 1.0;
  const Matrix8d m = drift_matrix(p, s.mean).m;
  REQUIRE(m.eigenvalues().real().maxCoeff() < 0.0);
  const auto d = diffusion_matrix(p);
  IntegratorConfig cfg;
  cfg.t_end = 8000.0;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  const Matrix8d v = propagate_frozen(m, d, s.cov, cfg);
  CHECK(lyapunov_rhs(m, v, d).cwiseAbs().maxCoeff() <= 1e-8);
}
