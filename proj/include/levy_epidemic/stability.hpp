#ifndef LEVY_EPIDEMIC_STABILITY_HPP
#define LEVY_EPIDEMIC_STABILITY_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levy_epidemic/errors.hpp"
#include "levy_epidemic/models.hpp"

namespace levy_epi {

struct StabilityVerdict {
  bool condition_holds = false;
  double threshold_value = 0.0;
  /// Slack of the condition; positive exactly when it holds.
  double margin = 0.0;
  /// Additive terms of the active threshold, in summation order.
  std::vector<std::pair<std::string, double>> terms;
  /// Competing branches of a min() threshold (SIRS only).
  std::vector<std::pair<std::string, double>> branches;
  /// Witness phi for the nonnegative-jump SIS criterion.
  std::optional<double> witness_phi;
};

/// Grid used for the phi witness search.
inline constexpr double kPhiGrid = 1e-6;

/// Negative net jump effect: beta < mu + lambda + int h. Throws NotApplicableError if int h >= 0.
StabilityVerdict sis_dfe_condition(const SisParams& p);

/**
 * Nonnegative jumps: beta < mu + lambda + phi * int h for some phi in (0,1).
 * threshold_value is the phi -> 0+ base mu + lambda; margin is taken at the
 * largest grid phi so that it is positive exactly when a witness exists.
 * Throws NotApplicableError when h takes negative values.
 */
StabilityVerdict sis_dfe_condition_positive(const SisParams& p);

/// Picks the criterion matching the sign of the jumps. Mixed-sign h with int h >= 0
/// has no criterion and throws NotApplicableError.
StabilityVerdict sis_dfe_verdict(const SisParams& p);

/// beta < min(lambda + int j - int j^2/2 - sigma^2/2, delta).
StabilityVerdict sirs_dfe_condition(const SirsParams& p);

struct LyapunovConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double kappa = 0.0;
};

/// True when every inequality the SIRS Lyapunov argument needs is satisfied.
bool satisfies_lyapunov_bounds(const SirsParams& p, const LyapunovConstants& c);

/// kappa = (delta - beta)/4, c3 = 1, c1 and c2 at 1.01x their lower bounds.
/// Throws InfeasibleError when the SIRS condition fails.
LyapunovConstants find_lyapunov_constants(const SirsParams& p);

// Lyapunov functions and their analytic generators.
inline double sis_lyapunov_g(double s) { return 1.0 - s; }
double sirs_lyapunov_f(const LyapunovConstants& c, const SimplexState& x);

double sis_generator_g(const SisParams& p, double s);
double sirs_generator_f(const SirsParams& p, const LyapunovConstants& c, const SimplexState& x);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_STABILITY_HPP
