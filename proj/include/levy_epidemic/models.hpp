#ifndef LEVY_EPIDEMIC_MODELS_HPP
#define LEVY_EPIDEMIC_MODELS_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "levy_epidemic/stochastic_kernel.hpp"

namespace levy_epi {

/// Stochastic SIS: rates per day, sigma scales the contact noise, jumps carry h.
struct SisParams {
  double beta = 0.0;
  double mu = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
  JumpSpec jumps;

  void validate() const;
  bool deterministic() const { return sigma == 0.0 && jumps.total_mass() == 0.0; }
  bool operator==(const SisParams&) const = default;
};

/// Stochastic SIRS without demography; the jump function j must be nonnegative.
struct SirsParams {
  double beta = 0.0;
  double lambda = 0.0;
  double delta = 0.0;
  double sigma = 0.0;
  JumpSpec jumps;

  void validate() const;
  bool deterministic() const { return sigma == 0.0 && jumps.total_mass() == 0.0; }
  bool operator==(const SirsParams&) const = default;
};

using ModelParams = std::variant<SisParams, SirsParams>;

/// Compartment frequencies: (S, I) or (S, I, R).
class SimplexState {
 public:
  static constexpr double kSumTolerance = 1e-9;

  SimplexState() = default;
  SimplexState(double s, double i);
  SimplexState(double s, double i, double r);
  /// Validating factory; throws std::invalid_argument when off the simplex.
  static SimplexState from(const std::vector<double>& coords);

  std::size_t size() const { return n_; }
  double operator[](std::size_t k) const { return c_[k]; }
  double& operator[](std::size_t k) { return c_[k]; }
  double S() const { return c_[0]; }
  double I() const { return c_[1]; }
  double R() const { return n_ == 3 ? c_[2] : 0.0; }

  double sum() const;
  /// Every coordinate in [0,1] and the sum within kSumTolerance of 1.
  bool on_simplex() const;
  /// On the simplex with every coordinate strictly positive.
  bool interior() const;

  std::vector<double> coords() const { return {c_.begin(), c_.begin() + n_}; }

  bool operator==(const SimplexState&) const = default;

 private:
  std::array<double, 3> c_{};
  std::size_t n_ = 0;
};

// One-dimensional SIS reduction on S (I = 1 - S).
double sis_drift(const SisParams& p, double s);
double sis_diffusion(const SisParams& p, double s);
double sis_jump_amplitude(const SisParams& p, double s, double mark);

struct SirsCoefficients {
  std::array<double, 3> drift{};
  std::array<double, 3> diffusion{};
  std::array<double, 3> jump{};
};

SirsCoefficients sirs_coefficients(const SirsParams& p, const SimplexState& x,
                                   std::optional<double> mark = std::nullopt);

enum class EquilibriumKind { DiseaseFreeStable, EndemicStable };

struct Equilibrium {
  SimplexState state;
  EquilibriumKind kind;
};

std::string to_string(EquilibriumKind kind);

/// Equilibria of the noise-free system. The disease-free point is always listed first;
/// the endemic point is listed (and marked stable) only above the deterministic threshold.
std::vector<Equilibrium> deterministic_equilibria(const SisParams& p);
std::vector<Equilibrium> deterministic_equilibria(const SirsParams& p);

/// Noise-free vector field on the full simplex state (used by equilibrium checks).
std::array<double, 3> deterministic_drift(const SisParams& p, const SimplexState& x);
std::array<double, 3> deterministic_drift(const SirsParams& p, const SimplexState& x);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_MODELS_HPP
