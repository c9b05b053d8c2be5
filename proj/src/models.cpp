#include "levy_epidemic/models.hpp"

#include <cmath>
#include <stdexcept>

namespace levy_epi {

namespace {

void require_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and non-negative");
  }
}

}  // namespace

void SisParams::validate() const {
  require_rate(beta, "beta");
  require_rate(mu, "mu");
  require_rate(lambda, "lambda");
  require_rate(sigma, "sigma");
}

void SirsParams::validate() const {
  require_rate(beta, "beta");
  require_rate(lambda, "lambda");
  require_rate(delta, "delta");
  require_rate(sigma, "sigma");
  if (jumps.range().first < 0.0) {
    throw std::invalid_argument("SIRS jump function must be nonnegative");
  }
}

// ------------------------------------------------------------ SimplexState

SimplexState::SimplexState(double s, double i) : c_{s, i, 0.0}, n_(2) {}
SimplexState::SimplexState(double s, double i, double r) : c_{s, i, r}, n_(3) {}

SimplexState SimplexState::from(const std::vector<double>& coords) {
  SimplexState x;
  if (coords.size() == 2) {
    x = SimplexState(coords[0], coords[1]);
  } else if (coords.size() == 3) {
    x = SimplexState(coords[0], coords[1], coords[2]);
  } else {
    throw std::invalid_argument("simplex state needs 2 or 3 coordinates");
  }
  if (!x.on_simplex()) throw std::invalid_argument("state is not on the simplex");
  return x;
}

double SimplexState::sum() const {
  double total = 0.0;
  for (std::size_t k = 0; k < n_; ++k) total += c_[k];
  return total;
}

bool SimplexState::on_simplex() const {
  if (n_ == 0) return false;
  for (std::size_t k = 0; k < n_; ++k) {
    if (!(c_[k] >= 0.0 && c_[k] <= 1.0)) return false;
  }
  return std::abs(sum() - 1.0) <= kSumTolerance;
}

bool SimplexState::interior() const {
  if (!on_simplex()) return false;
  for (std::size_t k = 0; k < n_; ++k) {
    if (!(c_[k] > 0.0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------- SIS

double sis_drift(const SisParams& p, double s) {
  return -p.beta * s * (1.0 - s) - p.mu * s + p.mu + p.lambda * (1.0 - s);
}

double sis_diffusion(const SisParams& p, double s) { return -p.sigma * s * (1.0 - s); }

double sis_jump_amplitude(const SisParams& p, double s, double mark) {
  return p.jumps(mark) * s * (1.0 - s);
}

std::array<double, 3> deterministic_drift(const SisParams& p, const SimplexState& x) {
  const double s = x.S();
  const double i = x.I();
  return {-p.beta * s * i - p.mu * s + p.mu + p.lambda * i,
          p.beta * s * i - (p.lambda + p.mu) * i, 0.0};
}

std::vector<Equilibrium> deterministic_equilibria(const SisParams& p) {
  std::vector<Equilibrium> out{{SimplexState(1.0, 0.0), EquilibriumKind::DiseaseFreeStable}};
  if (p.beta > p.mu + p.lambda) {
    const double s = (p.mu + p.lambda) / p.beta;
    out.push_back({SimplexState(s, 1.0 - s), EquilibriumKind::EndemicStable});
  }
  return out;
}

// ---------------------------------------------------------------- SIRS

SirsCoefficients sirs_coefficients(const SirsParams& p, const SimplexState& x,
                                   std::optional<double> mark) {
  const double s = x.S();
  const double i = x.I();
  const double r = x.R();
  const double infection = p.beta * s * i;
  const double recovery = p.lambda * i;
  const double waning = p.delta * r;
  const double noise = p.sigma * s * i;

  SirsCoefficients c;
  c.drift = {-infection + waning, infection - recovery, recovery - waning};
  c.diffusion = {-noise, noise, 0.0};
  if (mark) {
    const double moved = p.jumps(*mark) * i;
    c.jump = {0.0, -moved, moved};
  }
  return c;
}

std::array<double, 3> deterministic_drift(const SirsParams& p, const SimplexState& x) {
  return sirs_coefficients(p, x).drift;
}

std::vector<Equilibrium> deterministic_equilibria(const SirsParams& p) {
  std::vector<Equilibrium> out{
      {SimplexState(1.0, 0.0, 0.0), EquilibriumKind::DiseaseFreeStable}};
  if (p.beta > p.lambda) {
    const double s = p.lambda / p.beta;
    // R* = (1 - lambda/beta) / (1 + delta/lambda), written to stay finite at lambda = 0.
    const double r =
        p.lambda + p.delta > 0.0 ? (1.0 - s) * p.lambda / (p.lambda + p.delta) : 0.0;
    out.push_back({SimplexState(s, 1.0 - s - r, r), EquilibriumKind::EndemicStable});
  }
  return out;
}

std::string to_string(EquilibriumKind kind) {
  return kind == EquilibriumKind::DiseaseFreeStable ? "disease_free_stable" : "endemic_stable";
}

}  // namespace levy_epi
