#include "levy_epidemic/stability.hpp"

#include <algorithm>
#include <cmath>

namespace levy_epi {

namespace {

double sum_terms(const std::vector<std::pair<std::string, double>>& terms) {
  double total = 0.0;
  for (const auto& [name, v] : terms) total += v;
  return total;
}

}  // namespace

StabilityVerdict sis_dfe_condition(const SisParams& p) {
  p.validate();
  const double int_h = compute_jump_integrals(p.jumps).int_h;
  if (!(int_h < 0.0)) {
    throw NotApplicableError(
        "jump integral is not negative; use the nonnegative-jump criterion instead");
  }
  StabilityVerdict v;
  v.terms = {{"mu", p.mu}, {"lambda", p.lambda}, {"int_h", int_h}};
  v.threshold_value = sum_terms(v.terms);
  v.margin = v.threshold_value - p.beta;
  v.condition_holds = v.margin > 0.0;
  return v;
}

StabilityVerdict sis_dfe_condition_positive(const SisParams& p) {
  p.validate();
  if (p.jumps.range().first < 0.0) {
    throw NotApplicableError("jump function takes negative values");
  }
  const double int_h = compute_jump_integrals(p.jumps).int_h;
  StabilityVerdict v;
  v.terms = {{"mu", p.mu}, {"lambda", p.lambda}};
  const double base = sum_terms(v.terms);
  v.threshold_value = base;

  constexpr long kLast = static_cast<long>(1.0 / kPhiGrid) - 1;
  auto bound = [&](long k) { return base + static_cast<double>(k) * kPhiGrid * int_h; };

  v.margin = bound(kLast) - p.beta;
  v.condition_holds = v.margin > 0.0;
  if (!v.condition_holds) return v;

  // Smallest grid phi with beta < base + phi * int_h; the bound is monotone in k.
  long k = 1;
  if (!(p.beta < bound(1))) {
    k = static_cast<long>(std::floor((p.beta - base) / (kPhiGrid * int_h)));
    k = std::clamp(k, 1L, kLast);
    while (k > 1 && p.beta < bound(k - 1)) --k;
    while (!(p.beta < bound(k))) ++k;
  }
  v.witness_phi = static_cast<double>(k) * kPhiGrid;
  return v;
}

StabilityVerdict sis_dfe_verdict(const SisParams& p) {
  if (compute_jump_integrals(p.jumps).int_h < 0.0) return sis_dfe_condition(p);
  if (p.jumps.range().first >= 0.0) return sis_dfe_condition_positive(p);
  throw NotApplicableError("mixed-sign jump function with nonnegative integral has no criterion");
}

StabilityVerdict sirs_dfe_condition(const SirsParams& p) {
  p.validate();
  const JumpIntegrals ji = compute_jump_integrals(p.jumps);
  const std::vector<std::pair<std::string, double>> noisy = {
      {"lambda", p.lambda},
      {"int_j", ji.int_h},
      {"-int_j_sq/2", -0.5 * ji.int_h_sq},
      {"-sigma^2/2", -0.5 * p.sigma * p.sigma}};
  const double branch_noise = sum_terms(noisy);

  StabilityVerdict v;
  v.branches = {{"lyapunov", branch_noise}, {"delta", p.delta}};
  if (branch_noise <= p.delta) {
    v.terms = noisy;
    v.threshold_value = branch_noise;
  } else {
    v.terms = {{"delta", p.delta}};
    v.threshold_value = p.delta;
  }
  v.margin = v.threshold_value - p.beta;
  v.condition_holds = v.margin > 0.0;
  return v;
}

bool satisfies_lyapunov_bounds(const SirsParams& p, const LyapunovConstants& c) {
  const JumpIntegrals ji = compute_jump_integrals(p.jumps);
  if (!(c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0 && c.kappa > 0.0)) return false;
  const double gap = p.delta - p.beta - 2.0 * c.kappa;
  if (!(gap > 0.0)) return false;
  if (!(c.c1 > c.c3 * (p.lambda + ji.int_h) / gap)) return false;
  const double denom =
      p.lambda + ji.int_h - 0.5 * ji.int_h_sq - 0.5 * p.sigma * p.sigma - p.beta;
  if (!(denom > 0.0)) return false;
  return c.c2 > (c.c1 * (0.5 * p.sigma * p.sigma + p.beta) + c.c3 * ji.int_h_sq) / denom;
}

LyapunovConstants find_lyapunov_constants(const SirsParams& p) {
  if (!sirs_dfe_condition(p).condition_holds) {
    throw InfeasibleError("SIRS stability condition fails; no Lyapunov constants exist");
  }
  const JumpIntegrals ji = compute_jump_integrals(p.jumps);
  constexpr double kHeadroom = 1.01;
  LyapunovConstants c;
  c.kappa = 0.25 * (p.delta - p.beta);
  c.c3 = 1.0;
  const double c1_floor = c.c3 * (p.lambda + ji.int_h) / (p.delta - p.beta - 2.0 * c.kappa);
  c.c1 = kHeadroom * c1_floor;
  const double denom =
      p.lambda + ji.int_h - 0.5 * ji.int_h_sq - 0.5 * p.sigma * p.sigma - p.beta;
  const double c2_floor = (c.c1 * (0.5 * p.sigma * p.sigma + p.beta) + c.c3 * ji.int_h_sq) / denom;
  // Any positive c2 clears a zero floor.
  c.c2 = c2_floor > 0.0 ? kHeadroom * c2_floor : 1.0;
  return c;
}

double sirs_lyapunov_f(const LyapunovConstants& c, const SimplexState& x) {
  const double a = x[0] - 1.0;
  return c.c1 * a * a + c.c2 * x[1] * x[1] + c.c3 * x[2] * x[2];
}

double sis_generator_g(const SisParams& p, double s) {
  const double int_h = compute_jump_integrals(p.jumps).int_h;
  return -(-p.beta * s + p.mu + p.lambda + s * int_h) * (1.0 - s);
}

double sirs_generator_f(const SirsParams& p, const LyapunovConstants& c, const SimplexState& x) {
  const JumpIntegrals ji = compute_jump_integrals(p.jumps);
  const double x1 = x[0];
  const double x2 = x[1];
  const double x3 = x[2];
  const auto drift = sirs_coefficients(p, x).drift;

  // grad f . drift
  const double first_order = 2.0 * c.c1 * (x1 - 1.0) * drift[0] + 2.0 * c.c2 * x2 * drift[1] +
                             2.0 * c.c3 * x3 * drift[2];
  // (1/2) b^T Hess(f) b with b = sigma x1 x2 (-1, 1, 0); Hess(f) = diag(2c1, 2c2, 2c3).
  const double noise = p.sigma * x1 * x2;
  const double second_order = (c.c1 + c.c2) * noise * noise;
  // int [f(x + j(y) x2 (0,-1,1)) - f(x)] nu(dy), expanded in the two jump moments.
  const double jump = c.c2 * (ji.int_h_sq - 2.0 * ji.int_h) * x2 * x2 +
                      c.c3 * (2.0 * ji.int_h * x2 * x3 + ji.int_h_sq * x2 * x2);
  return first_order + second_order + jump;
}

}  // namespace levy_epi
