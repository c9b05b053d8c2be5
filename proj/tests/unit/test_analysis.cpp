#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levy_epidemic/analysis.hpp"
#include "levy_epidemic/errors.hpp"

using namespace levy_epi;

namespace {

SisParams fig1a() { return {0.1, 0.2, 0.3, 0.3, JumpSpec::constant(1.0, -0.01)}; }
SisParams fig2b_nojump() { return {0.8, 0.1, 0.2, 0.3, {}}; }

SimConfig horizon(double t_end, std::uint64_t seed = 0) {
  SimConfig cfg;
  cfg.t_end = t_end;
  cfg.seed = seed;
  return cfg;
}

// Classical two-sided exit probability of a 1-D diffusion through its scale function:
// u(x) = int_{x1}^{x} s'(y) dy / int_{x1}^{x2} s'(y) dy, s'(y) = exp(-int_{x1}^{y} 2 a/g^2).
double scale_exit_oracle(const SisParams& p, double x1, double x2, double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto ratio = [&](double z) {
    const double drift = -p.beta * z * (1 - z) - p.mu * z + p.mu + p.lambda * (1 - z);
    const double g = p.sigma * z * (1 - z);
    return 2.0 * drift / (g * g);
  };
  auto scale_density = [&](double y) {
    if (y == x1) return 1.0;
    return std::exp(-gauss_kronrod<double, 61>::integrate(ratio, x1, y, 8, 1e-14));
  };
  const double num = gauss_kronrod<double, 61>::integrate(scale_density, x1, x, 8, 1e-13);
  const double den = gauss_kronrod<double, 61>::integrate(scale_density, x1, x2, 8, 1e-13);
  return num / den;
}

}  // namespace

TEST_CASE("clopper-pearson interval") {
  const auto [lo0, hi0] = clopper_pearson(0, 10);
  CHECK(lo0 == 0.0);
  CHECK(hi0 == doctest::Approx(0.30850).epsilon(1e-4));
  const auto [lo5, hi5] = clopper_pearson(5, 10);
  CHECK(lo5 == doctest::Approx(0.18709).epsilon(1e-4));
  CHECK(hi5 == doctest::Approx(0.81291).epsilon(1e-4));
  const auto [lo10, hi10] = clopper_pearson(10, 10);
  CHECK(hi10 == 1.0);
  CHECK(lo10 == doctest::Approx(0.69150).epsilon(1e-4));
}

TEST_CASE("extinction from a start at the threshold") {
  const EnsembleSummary s = estimate_extinction(fig1a(), SimplexState(1.0 - 1e-9, 1e-9),
                                                horizon(1.0), 50, 0.01);
  CHECK(s.extinction_fraction == 1.0);
  CHECK(s.extinct_count == 50);
  CHECK(s.extinction_ci_high == 1.0);
  CHECK(s.extinction_ci_low > 0.9);
}

TEST_CASE("hitting time is zero when the start is already inside the target") {
  const EnsembleSummary s =
      estimate_hitting_time(fig1a(), SimplexState(0.6, 0.4), 0.5, horizon(10.0), 40);
  CHECK(s.hit_count == 40);
  CHECK(s.censored_count == 0);
  CHECK(s.mean_hitting_time == 0.0);
  CHECK(s.hitting_time_se == 0.0);
}

TEST_CASE("hitting time with censoring") {
  const EnsembleSummary s =
      estimate_hitting_time(fig1a(), SimplexState(0.6, 0.4), 0.05, horizon(5.0), 40);
  CHECK(s.censored_count + s.hit_count == 40);
  CHECK(s.censored_count > 0);
}

TEST_CASE("ensemble is invariant to path order and thread count") {
  SimConfig cfg = horizon(20.0, 31);
  EnsembleOptions opts;
  opts.n_paths = 24;
  opts.epsilon = 0.3;
  opts.stream_indices.resize(24);
  std::iota(opts.stream_indices.begin(), opts.stream_indices.end(), 0);
  const EnsembleSummary base = run_ensemble(fig1a(), SimplexState(0.6, 0.4), cfg, opts);

  EnsembleOptions shuffled = opts;
  std::mt19937_64 gen(4);
  std::shuffle(shuffled.stream_indices.begin(), shuffled.stream_indices.end(), gen);
  const EnsembleSummary perm = run_ensemble(fig1a(), SimplexState(0.6, 0.4), cfg, shuffled);
  CHECK(perm.extinction_fraction == base.extinction_fraction);
  CHECK(perm.terminal_i_q50 == base.terminal_i_q50);
  CHECK(perm.hit_count == base.hit_count);
  CHECK(perm.stats.moves == base.stats.moves);
  CHECK(perm.mean_hitting_time == doctest::Approx(base.mean_hitting_time).epsilon(1e-14));

  EnsembleOptions threaded = opts;
  threaded.threads = 3;
  const EnsembleSummary par = run_ensemble(fig1a(), SimplexState(0.6, 0.4), cfg, threaded);
  CHECK(par.terminal_i_q05 == base.terminal_i_q05);
  CHECK(par.terminal_i_q95 == base.terminal_i_q95);
  CHECK(par.mean_hitting_time == base.mean_hitting_time);
  CHECK(par.hitting_time_se == base.hitting_time_se);
}

TEST_CASE("ensemble argument validation") {
  EnsembleOptions opts;
  opts.n_paths = 0;
  CHECK_THROWS_AS(run_ensemble(fig1a(), SimplexState(0.6, 0.4), horizon(1.0), opts),
                  std::invalid_argument);
  opts.n_paths = 2;
  opts.i_threshold = 1.0;
  CHECK_THROWS_AS(run_ensemble(fig1a(), SimplexState(0.6, 0.4), horizon(1.0), opts),
                  std::invalid_argument);
}

TEST_CASE("dynkin check of the sis generator") {
  DynkinOptions opts;
  opts.seed = 12;
  const DynkinResult r = dynkin_check_sis_g(fig1a(), SimplexState(0.6, 0.4), opts);
  CHECK(r.analytic == doctest::Approx(-0.1736).epsilon(1e-12));
  CHECK(std::abs(r.z_score) < 3.0);

  const SisParams quiet{0.1, 0.2, 0.3, 0.0, {}};
  const DynkinResult q = dynkin_check_sis_g(quiet, SimplexState(0.6, 0.4), opts);
  CHECK(std::abs(q.mc_estimate - q.analytic) < 1e-9);
  CHECK(q.standard_error < 1e-12);

  const DynkinResult edge = dynkin_check_sis_g(quiet, SimplexState(1.0, 0.0), opts);
  CHECK(edge.mc_estimate == 0.0);
  CHECK(edge.analytic == 0.0);
}

TEST_CASE("dynkin check of the sirs generator") {
  const SirsParams p{0.3, 0.29, 0.4, 0.1, JumpSpec::constant(1.0, 0.3, true)};
  const LyapunovConstants c = find_lyapunov_constants(p);
  DynkinOptions opts;
  opts.seed = 13;
  const DynkinResult r = dynkin_check_sirs_f(p, c, SimplexState(0.3, 0.6, 0.1), opts);
  CHECK(std::abs(r.z_score) < 3.0);
  CHECK(r.analytic < 0.0);
}

TEST_CASE("exit probability on the absorbing layers") {
  const ExitProblem prob{0.3, 0.45, 200, fig2b_nojump()};
  CHECK(solve_exit_probability(prob, 0.5).pi_up == 1.0);
  CHECK(solve_exit_probability(prob, 0.45).pi_up == 1.0);
  CHECK(solve_exit_probability(prob, 0.1).pi_up == 0.0);
  CHECK(solve_exit_probability(prob, 0.3).pi_up == 0.0);
}

TEST_CASE("no-jump exit probability matches the scale function") {
  const SisParams p = fig2b_nojump();
  const ExitProblem prob{0.3, 0.45, 1000, p};
  const ExitSolution sol = solve_exit_probability(prob, 0.375);
  for (double x : {0.32, 0.35, 0.375, 0.4, 0.43}) {
    CHECK(std::abs(sol.at(x) - scale_exit_oracle(p, 0.3, 0.45, x)) < 1e-3);
  }
  CHECK(sol.condition_estimate > 1.0);
}

TEST_CASE("exit probability is a monotone probability and converges under refinement") {
  std::vector<SisParams> cases = {fig1a(), fig2b_nojump(),
                                  SisParams{0.4, 0.1, 0.3, 0.3, JumpSpec::constant(0.5, 0.1, true)},
                                  SisParams{0.4, 0.1, 0.3, 0.3,
                                            JumpSpec(2.0, UniformMarks{0.0, 1.0},
                                                     PiecewiseLinearJump{{{0.0, -0.4}, {1.0, 0.3}}})}};
  for (const SisParams& p : cases) {
    const ExitProblem prob{0.2, 0.8, 500, p};
    const ExitSolution sol = solve_exit_probability(prob, 0.5);
    for (std::size_t k = 0; k < sol.u.size(); ++k) {
      REQUIRE(sol.u[k] >= -1e-12);
      REQUIRE(sol.u[k] <= 1.0 + 1e-12);
      if (k > 0) REQUIRE(sol.u[k] >= sol.u[k - 1] - 1e-12);
    }
    const ExitProblem fine{0.2, 0.8, 1000, p};
    CHECK(std::abs(solve_exit_probability(fine, 0.5).pi_up - sol.pi_up) < 1e-3);
  }
}

TEST_CASE("degenerate exit problem is a numerical failure") {
  const ExitProblem prob{0.2, 0.8, 200, SisParams{0.0, 0.0, 0.0, 0.0, {}}};
  CHECK_THROWS_AS(solve_exit_probability(prob, 0.5), NumericalFailure);
}

TEST_CASE("exit problem validation") {
  CHECK_THROWS_AS(solve_exit_probability(ExitProblem{0.5, 0.4, 200, fig1a()}, 0.45),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_exit_probability(ExitProblem{0.2, 0.8, 50, fig1a()}, 0.45),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc_exit_probability(ExitProblem{0.2, 0.8, 200, fig1a()}, 0.9, horizon(1.0), 10),
                  std::invalid_argument);
}

TEST_CASE("driftless exit from the midpoint is a fair coin") {
  const ExitProblem prob{0.3, 0.7, 200, SisParams{0.0, 0.0, 0.0, 1.0, {}}};
  const ExitEstimate mc = mc_exit_probability(prob, 0.5, horizon(100.0, 5), 4000);
  CHECK(mc.censored == 0);
  CHECK(std::abs(mc.probability - 0.5) < 3.0 * 0.5 / std::sqrt(4000.0));
  CHECK(solve_exit_probability(prob, 0.5).pi_up == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("exit probability approaches one near the upper edge") {
  const ExitProblem prob{0.3, 0.45, 500, SisParams{0.8, 0.1, 0.2, 0.01, {}}};
  const ExitEstimate mc = mc_exit_probability(prob, 0.4499, horizon(50.0, 6), 200);
  CHECK(mc.probability > 0.95);
}

TEST_CASE("sweep reuses the solver") {
  const auto out = sweep_exit_probability(fig1a(), {{0.2, 0.8}, {0.1, 0.9}, {0.05, 0.95}}, 0.5, 200);
  REQUIRE(out.size() == 3);
  CHECK(out[0] == solve_exit_probability(ExitProblem{0.2, 0.8, 200, fig1a()}, 0.5).pi_up);
}

TEST_CASE("above-threshold negative-jump SIS stays epidemic") {
  const SisParams fig2a{0.4, 0.15, 0.3, 0.3, JumpSpec::constant(1.0, -0.1)};
  const EnsembleSummary s =
      estimate_extinction(fig2a, SimplexState(0.6, 0.4), horizon(500.0, 21), 200, 0.01);
  MESSAGE("extinction fraction " << s.extinction_fraction << ", median terminal I "
                                 << s.terminal_i_q50);
  CHECK(s.extinction_fraction < 0.5);
}
