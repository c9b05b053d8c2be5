#ifndef LEVY_EPIDEMIC_INTEGRATOR_HPP
#define LEVY_EPIDEMIC_INTEGRATOR_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "levy_epidemic/models.hpp"
#include "levy_epidemic/stochastic_kernel.hpp"

namespace levy_epi {

enum class BoundaryPolicy {
  Clamp,       // clamp each coordinate to [0,1], then renormalize
  RejectStep,  // discard the offending move and keep the previous state
};

std::string to_string(BoundaryPolicy policy);
BoundaryPolicy boundary_policy_from_string(const std::string& name);

struct SimConfig {
  double t_end = 500.0;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  BoundaryPolicy boundary_policy = BoundaryPolicy::Clamp;
  std::size_t record_stride = 1;

  void validate() const;
  /// Number of diffusion grid intervals; the last one may be shorter than dt.
  std::size_t grid_steps() const;
  double grid_time(std::size_t k) const;

  bool operator==(const SimConfig&) const = default;
};

/// Counters accumulated by every move of the scheme.
struct StepStats {
  std::uint64_t moves = 0;
  std::uint64_t interventions = 0;  // boundary-policy actions
  double max_sum_error = 0.0;       // max |sum(coords) - 1| seen before the policy acts

  double intervention_rate() const {
    return moves == 0 ? 0.0 : static_cast<double>(interventions) / static_cast<double>(moves);
  }
  void merge(const StepStats& other);
};

struct JumpRecord {
  double time;
  double mark;
  SimplexState pre_state;  // left limit at the jump time
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SimplexState> states;
  std::vector<std::uint8_t> jumped;  // 1 where the row was recorded at a jump instant
  std::vector<JumpRecord> jump_marks;
  std::uint64_t clamp_count = 0;
  StepStats stats;

  const SimplexState& terminal() const { return states.back(); }
};

namespace detail {

inline void enforce_boundary(SimplexState& x, const SimplexState& previous,
                             BoundaryPolicy policy, StepStats& stats) {
  const std::size_t n = x.size();
  stats.max_sum_error = std::max(stats.max_sum_error, std::abs(x.sum() - 1.0));
  bool outside = false;
  for (std::size_t k = 0; k < n; ++k) outside = outside || x[k] < 0.0 || x[k] > 1.0;
  if (!outside) return;
  ++stats.interventions;
  if (policy == BoundaryPolicy::RejectStep) {
    x = previous;
    return;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = std::clamp(x[k], 0.0, 1.0);
    total += x[k];
  }
  for (std::size_t k = 0; k < n; ++k) x[k] /= total;
}

// Euler-Maruyama move written as fluxes between compartments so the
// coordinate sum is conserved term by term.
inline void euler_move(const SisParams& p, SimplexState& x, double h, double dW) {
  const double s = x.S();
  const double i = x.I();
  const double to_s = (-p.beta * s * i + (p.lambda + p.mu) * i) * h - p.sigma * s * i * dW;
  x[0] = s + to_s;
  x[1] = i - to_s;
}

inline void euler_move(const SirsParams& p, SimplexState& x, double h, double dW) {
  const double s = x.S();
  const double i = x.I();
  const double r = x.R();
  const double infection = p.beta * s * i * h + p.sigma * s * i * dW;
  const double recovery = p.lambda * i * h;
  const double waning = p.delta * r * h;
  x[0] = s - infection + waning;
  x[1] = i + infection - recovery;
  x[2] = r + recovery - waning;
}

inline void apply_jump(const SisParams& p, SimplexState& x, double mark) {
  const double a = p.jumps(mark) * x.S() * x.I();
  x[0] += a;
  x[1] -= a;
}

inline void apply_jump(const SirsParams& p, SimplexState& x, double mark) {
  const double a = p.jumps(mark) * x.I();
  x[1] -= a;
  x[2] += a;
}

inline std::size_t state_size(const SisParams&) { return 2; }
inline std::size_t state_size(const SirsParams&) { return 3; }

/**
 * Jump-adapted path engine. The diffusion grid t_k = k*dt is merged with
 * the exact jump times: the scheme integrates up to each jump time, applies
 * the jump to the left-limit state, and continues.
 *
 * Observer interface:
 *   bool on_grid(std::size_t k, double t, const SimplexState& x);
 *   bool on_jump(double t, double mark, const SimplexState& pre, const SimplexState& post);
 * Returning false stops the path. on_grid(0, 0, x0) is called first.
 */
template <class Params, class Observer>
StepStats run_path(const Params& p, SimplexState x, const SimConfig& cfg, RngStream& stream,
                   Observer& obs) {
  StepStats stats;
  RngStream noise = stream.substream(0);
  RngStream arrivals = stream.substream(1);
  const double rate = p.jumps.total_mass();
  const bool diffusive = p.sigma != 0.0;
  double next_jump = rate > 0.0 ? arrivals.exponential(rate) : std::numeric_limits<double>::infinity();

  auto move = [&](double h) {
    if (!(h > 0.0)) return;
    const double dW = diffusive ? std::sqrt(h) * noise.standard_normal() : 0.0;
    const SimplexState before = x;
    euler_move(p, x, h, dW);
    ++stats.moves;
    enforce_boundary(x, before, cfg.boundary_policy, stats);
  };

  if (!obs.on_grid(0, 0.0, x)) return stats;
  const std::size_t n = cfg.grid_steps();
  double t = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t_next = cfg.grid_time(k);
    while (next_jump <= t_next) {
      move(next_jump - t);
      t = next_jump;
      const SimplexState pre = x;
      const double mark = p.jumps.draw_mark(arrivals);
      apply_jump(p, x, mark);
      enforce_boundary(x, pre, cfg.boundary_policy, stats);
      if (!obs.on_jump(t, mark, pre, x)) return stats;
      const double following = t + arrivals.exponential(rate);
      next_jump = following > t ? following : std::nextafter(t, std::numeric_limits<double>::infinity());
    }
    move(t_next - t);
    t = t_next;
    if (!obs.on_grid(k, t, x)) return stats;
  }
  return stats;
}

}  // namespace detail

/**
 * One scheme step of length dt: Euler-Maruyama move with increment dW, then
 * every jump mark in `marks_at_end` applied at the end of the step to the
 * left-limit state, then the boundary policy.
 */
SimplexState step(const SisParams& p, const SimplexState& state, double dt, double dW,
                  std::span<const double> marks_at_end = {},
                  BoundaryPolicy policy = BoundaryPolicy::Clamp, StepStats* stats = nullptr);
SimplexState step(const SirsParams& p, const SimplexState& state, double dt, double dW,
                  std::span<const double> marks_at_end = {},
                  BoundaryPolicy policy = BoundaryPolicy::Clamp, StepStats* stats = nullptr);

/// Validates the start state: stochastic runs need an interior x0, noise-free runs accept the boundary.
void check_initial_state(const SisParams& p, const SimplexState& x0);
void check_initial_state(const SirsParams& p, const SimplexState& x0);

Trajectory simulate_path(const SisParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream);
Trajectory simulate_path(const SirsParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream);
Trajectory simulate_path(const ModelParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_INTEGRATOR_HPP
