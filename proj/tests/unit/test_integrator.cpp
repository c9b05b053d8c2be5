#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "levy_epidemic/integrator.hpp"

using namespace levy_epi;

namespace {

SisParams fig1a() { return {0.1, 0.2, 0.3, 0.3, JumpSpec::constant(1.0, -0.01)}; }
SisParams fig2b_ode() { return {0.8, 0.1, 0.2, 0.0, {}}; }

// Reference solution of the noise-free SIS equation for S, written out independently.
double sis_ode_reference(const SisParams& p, double s0, double t_end) {
  using namespace boost::numeric::odeint;
  using state = std::array<double, 1>;
  state s{s0};
  auto rhs = [&](const state& x, state& dx, double) {
    const double S = x[0];
    const double I = 1.0 - S;
    dx[0] = -p.beta * S * I + p.mu * (1.0 - S) + p.lambda * I;
  };
  integrate_adaptive(make_controlled(1e-13, 1e-13, runge_kutta_dopri5<state>()), rhs, s, 0.0,
                     t_end, 1e-3);
  return s[0];
}

double terminal_s(const SisParams& p, double s0, double t_end, double dt) {
  SimConfig cfg;
  cfg.t_end = t_end;
  cfg.dt = dt;
  cfg.record_stride = 1000000;
  RngStream stream(0, 0);
  return simulate_path(p, SimplexState(s0, 1.0 - s0), cfg, stream).terminal().S();
}

}  // namespace

TEST_CASE("disease-free state is stationary without noise") {
  const SisParams p = fig2b_ode();
  for (double dt : {1e-3, 0.1, 1.0}) {
    CHECK(step(p, SimplexState(1.0, 0.0), dt, 0.0) == SimplexState(1.0, 0.0));
  }
  const SirsParams q{0.8, 0.1, 0.1, 0.0, {}};
  CHECK(step(q, SimplexState(1.0, 0.0, 0.0), 0.5, 0.0) == SimplexState(1.0, 0.0, 0.0));
}

TEST_CASE("one step keeps the coordinate sum") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n01;
  const SisParams p = fig1a();
  const double marks[] = {0.0, 0.0};
  for (int k = 0; k < 1000; ++k) {
    const double s = 0.05 + 0.9 * (k / 1000.0);
    const SimplexState x = step(p, SimplexState(s, 1.0 - s), 1e-3, 0.0316 * n01(gen), marks);
    CHECK(std::abs(x.sum() - 1.0) < 1e-15);
  }
}

TEST_CASE("jump is applied to the left limit") {
  const SisParams p = fig1a();
  const double mark[] = {0.0};
  const SimplexState x(0.6, 0.4);
  const SimplexState moved = step(p, x, 1e-3, 0.01);
  const SimplexState jumped = step(p, x, 1e-3, 0.01, mark);
  CHECK(jumped.S() - moved.S() == doctest::Approx(-0.01 * moved.S() * moved.I()).epsilon(1e-12));
}

TEST_CASE("deterministic SIS converges to the endemic point") {
  const SisParams p = fig2b_ode();
  const double reference = sis_ode_reference(p, 0.6, 200.0);
  CHECK(std::abs(reference - 0.375) < 1e-10);
  const double got = terminal_s(p, 0.6, 200.0, 1e-3);
  CHECK(std::abs(got - 0.375) < 1e-4);
}

TEST_CASE("noise-free path has first-order global error") {
  // Transient window where the error is visible, compared at two step sizes.
  const SisParams p = fig2b_ode();
  const double reference = sis_ode_reference(p, 0.6, 5.0);
  const double coarse = std::abs(terminal_s(p, 0.6, 5.0, 1e-3) - reference);
  const double fine = std::abs(terminal_s(p, 0.6, 5.0, 1e-4) - reference);
  CHECK(coarse < 1e-3);
  CHECK(coarse / fine == doctest::Approx(10.0).epsilon(0.1));
}

TEST_CASE("strong error scales like the square root of dt") {
  // Shared Brownian increments: a fine reference path against coarse paths
  // built from summed fine increments.
  const SisParams p{0.4, 0.1, 0.3, 1.0, {}};
  constexpr double t_end = 1.0;
  constexpr std::size_t fine_steps = 2048;
  const std::vector<std::size_t> ratios = {128, 64, 32, 16};  // coarse dt = ratio * fine dt
  const double dt_fine = t_end / fine_steps;

  std::mt19937_64 gen(77);
  std::normal_distribution<double> n01;
  std::vector<double> err(ratios.size(), 0.0);
  constexpr int paths = 2000;
  std::vector<double> dw(fine_steps);
  for (int path = 0; path < paths; ++path) {
    for (double& w : dw) w = std::sqrt(dt_fine) * n01(gen);
    SimplexState ref(0.5, 0.5);
    for (double w : dw) ref = step(p, ref, dt_fine, w);
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      SimplexState x(0.5, 0.5);
      for (std::size_t k = 0; k < fine_steps; k += ratios[r]) {
        double w = 0.0;
        for (std::size_t j = 0; j < ratios[r]; ++j) w += dw[k + j];
        x = step(p, x, dt_fine * static_cast<double>(ratios[r]), w);
      }
      err[r] += std::abs(x.S() - ref.S()) / paths;
    }
  }
  // Least-squares slope of log error against log dt.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    const double lx = std::log(static_cast<double>(ratios[r]));
    const double ly = std::log(err[r]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(ratios.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  MESSAGE("strong order estimate " << slope);
  CHECK(slope > 0.35);
  CHECK(slope < 0.8);
}

TEST_CASE("boundary policies") {
  const SisParams p{0.1, 0.2, 0.3, 2.0, {}};
  const SimplexState x(0.95, 0.05);
  // A large negative increment pushes S above one.
  StepStats clamp_stats;
  const SimplexState clamped = step(p, x, 1e-3, -30.0, {}, BoundaryPolicy::Clamp, &clamp_stats);
  CHECK(clamped == SimplexState(1.0, 0.0));
  CHECK(clamp_stats.interventions == 1);

  StepStats reject_stats;
  const SimplexState kept = step(p, x, 1e-3, -30.0, {}, BoundaryPolicy::RejectStep, &reject_stats);
  CHECK(kept == x);
  CHECK(reject_stats.interventions == 1);
  CHECK(reject_stats.moves == 1);

  CHECK(boundary_policy_from_string("reject_step") == BoundaryPolicy::RejectStep);
  CHECK(to_string(BoundaryPolicy::Clamp) == "clamp");
  CHECK_THROWS_AS(boundary_policy_from_string("wrap"), std::invalid_argument);
}

TEST_CASE("initial state checks") {
  SimConfig cfg;
  cfg.t_end = 1.0;
  RngStream stream(0, 0);
  CHECK_THROWS_AS(simulate_path(fig1a(), SimplexState(1.0, 0.0), cfg, stream), std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(fig1a(), SimplexState(0.7, 0.4), cfg, stream), std::invalid_argument);
  CHECK_THROWS_AS(simulate_path(fig1a(), SimplexState(0.3, 0.6, 0.1), cfg, stream),
                  std::invalid_argument);

  // A deterministic run may start on the boundary and stays put.
  const Trajectory flat = simulate_path(fig2b_ode(), SimplexState(1.0, 0.0), cfg, stream);
  for (const auto& x : flat.states) CHECK(x == SimplexState(1.0, 0.0));
}

TEST_CASE("sim config validation") {
  SimConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.t_end = 1e-4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.record_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SimConfig{};
  cfg.t_end = 0.3;
  cfg.dt = 0.1;
  CHECK(cfg.grid_steps() == 3);
  CHECK(cfg.grid_time(3) == 0.3);
}

TEST_CASE("trajectory structure") {
  SisParams p = fig1a();
  p.jumps = JumpSpec::constant(2.0, -0.2);
  SimConfig cfg;
  cfg.t_end = 50.0;
  cfg.dt = 1e-3;
  cfg.record_stride = 100;
  cfg.seed = 9;
  RngStream stream(cfg.seed, 0);
  const Trajectory traj = simulate_path(p, SimplexState(0.6, 0.4), cfg, stream);

  REQUIRE(traj.times.size() == traj.states.size());
  REQUIRE(traj.times.size() == traj.jumped.size());
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == 50.0);
  std::size_t jump_rows = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (k > 0) REQUIRE(traj.times[k] > traj.times[k - 1]);
    REQUIRE(traj.states[k].on_simplex());
    jump_rows += traj.jumped[k];
  }
  CHECK(jump_rows == traj.jump_marks.size());
  CHECK(traj.jump_marks.size() > 50);
  CHECK(traj.stats.max_sum_error < 1e-12);

  // Each jump row moves S by h * S(t-) * I(t-).
  std::size_t j = 0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (!traj.jumped[k]) continue;
    const JumpRecord& rec = traj.jump_marks[j++];
    CHECK(rec.time == traj.times[k]);
    const double expected = rec.pre_state.S() - 0.2 * rec.pre_state.S() * rec.pre_state.I();
    CHECK(traj.states[k].S() == doctest::Approx(expected).epsilon(1e-14));
  }

  // Bit-identical replay.
  RngStream again(cfg.seed, 0);
  const Trajectory replay = simulate_path(p, SimplexState(0.6, 0.4), cfg, again);
  CHECK(replay.times == traj.times);
  CHECK(replay.states == traj.states);
}

TEST_CASE("sirs path stays on the simplex") {
  const SirsParams p{0.8, 0.1, 0.1, 0.2, JumpSpec::constant(0.5, 0.1, true)};
  SimConfig cfg;
  cfg.t_end = 100.0;
  cfg.record_stride = 10;
  RngStream stream(3, 0);
  const Trajectory traj = simulate_path(p, SimplexState(0.3, 0.6, 0.1), cfg, stream);
  for (const auto& x : traj.states) REQUIRE(x.on_simplex());
  CHECK(traj.stats.max_sum_error < 1e-12);
  CHECK(traj.clamp_count == 0);
}
