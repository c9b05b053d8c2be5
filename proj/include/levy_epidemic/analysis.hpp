#ifndef LEVY_EPIDEMIC_ANALYSIS_HPP
#define LEVY_EPIDEMIC_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "levy_epidemic/integrator.hpp"
#include "levy_epidemic/models.hpp"
#include "levy_epidemic/stability.hpp"

namespace levy_epi {

// ----------------------------------------------------------------- ensembles

struct EnsembleOptions {
  std::size_t n_paths = 1000;
  double i_threshold = 0.01;
  /// When set, each path stops at the first time S >= 1 - epsilon.
  std::optional<double> epsilon;
  std::size_t threads = 1;
  /// Stream index per path; defaults to 0..n_paths-1.
  std::vector<std::uint64_t> stream_indices;
};

struct EnsembleSummary {
  std::size_t n_paths = 0;
  std::size_t extinct_count = 0;
  double extinction_fraction = 0.0;
  double extinction_ci_low = 0.0;  // exact (Clopper-Pearson) 95% interval
  double extinction_ci_high = 1.0;
  double terminal_i_q05 = 0.0;
  double terminal_i_q50 = 0.0;
  double terminal_i_q95 = 0.0;
  std::size_t hit_count = 0;
  std::size_t censored_count = 0;
  double mean_hitting_time = 0.0;  // over uncensored paths
  double hitting_time_se = 0.0;
  StepStats stats;
};

/// Exact two-sided binomial confidence interval for k successes out of n.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double level = 0.95);

/// Runs the ensemble; path i uses stream (cfg.seed, stream_indices[i]). The reduction walks
/// paths in index order, so the summary does not depend on the thread count.
EnsembleSummary run_ensemble(const ModelParams& params, const SimplexState& x0,
                             const SimConfig& cfg, const EnsembleOptions& opts);

/// Fraction of paths whose terminal I is below i_threshold.
EnsembleSummary estimate_extinction(const ModelParams& params, const SimplexState& x0,
                                    const SimConfig& cfg, std::size_t n_paths,
                                    double i_threshold, std::size_t threads = 1);

/// First time S >= 1 - epsilon; paths still short of it at t_end are censored.
EnsembleSummary estimate_hitting_time(const ModelParams& params, const SimplexState& x0,
                                      double epsilon, const SimConfig& cfg,
                                      std::size_t n_paths, std::size_t threads = 1);

// ------------------------------------------------------------ Dynkin check

struct DynkinOptions {
  double dt_probe = 1e-3;
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct DynkinResult {
  double mc_estimate = 0.0;
  double analytic = 0.0;
  double standard_error = 0.0;
  double z_score = 0.0;
};

/// Monte Carlo estimate of (E g(X(dt)) - g(x)) / dt for g(x) = 1 - S, against the analytic L0 g.
DynkinResult dynkin_check_sis_g(const SisParams& p, const SimplexState& x,
                                const DynkinOptions& opts);
/// Same for the SIRS Lyapunov function f with constants c.
DynkinResult dynkin_check_sirs_f(const SirsParams& p, const LyapunovConstants& c,
                                 const SimplexState& x, const DynkinOptions& opts);

// ------------------------------------------------------- exit probability

struct ExitProblem {
  double x1 = 0.2;
  double x2 = 0.8;
  std::size_t grid_n = 1000;
  SisParams params;

  void validate() const;
};

struct ExitSolution {
  std::vector<double> grid;  // nodes on [0,1], x1 and x2 included
  std::vector<double> u;     // probability of leaving upward, per node
  double pi_up = 0.0;        // u interpolated at x0
  double condition_estimate = 0.0;

  /// Linear interpolation of u.
  double at(double x) const;
};

/**
 * Finite-difference solution of
 *   alpha u' + (gamma^2/2) u'' + int [u(x + h(y) x (1-x)) - u(x)] nu(dy) = 0
 * on (x1, x2), u = 0 on [0, x1], u = 1 on [x2, 1]. Throws NumericalFailure
 * when the system is singular or too ill-conditioned.
 */
ExitSolution solve_exit_probability(const ExitProblem& prob, double x0);

struct ExitEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t n_up = 0;
  std::size_t n_down = 0;
  std::size_t censored = 0;  // still inside (x1, x2) at cfg.t_end; excluded
};

/// Fraction of paths whose first exit from (x1, x2) lands at or above x2.
ExitEstimate mc_exit_probability(const ExitProblem& prob, double x0, const SimConfig& cfg,
                                 std::size_t n_paths, std::size_t threads = 1);

/// pi_up at x0 for each (x1, x2) interval, for probing how the exit law moves with the window.
std::vector<double> sweep_exit_probability(const SisParams& params,
                                           const std::vector<std::pair<double, double>>& windows,
                                           double x0, std::size_t grid_n);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_ANALYSIS_HPP
