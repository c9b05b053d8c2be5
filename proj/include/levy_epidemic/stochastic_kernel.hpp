#ifndef LEVY_EPIDEMIC_STOCHASTIC_KERNEL_HPP
#define LEVY_EPIDEMIC_STOCHASTIC_KERNEL_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace levy_epi {

/**
 * Reproducible random stream addressed by (master_seed, stream_index).
 *
 * Each stream owns its own engine, seeded from the full address through
 * std::seed_seq, so path k of an ensemble draws the same variates no matter
 * which thread runs it or in what order. Streams are single-owner.
 */
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Independent child stream; same (seed, index, tag) always yields the same child.
  RngStream substream(std::uint64_t tag) const;

  /// Restart the variate sequence from the beginning.
  void reset();

  double standard_normal();
  double uniform01();
  /// Exponential variate with the given rate (rate > 0).
  double exponential(double rate);

  std::mt19937_64& engine() { return engine_; }

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
            std::vector<std::uint64_t> path);

  void seed_engine();

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::vector<std::uint64_t> path_;
  std::mt19937_64 engine_;
};

// Mark distributions of the normalized intensity measure.
struct PointMass {
  double y0 = 0.0;

  bool operator==(const PointMass&) const = default;
};
struct UniformMarks {
  double a = 0.0;
  double b = 1.0;

  bool operator==(const UniformMarks&) const = default;
};
struct DiscreteMarks {
  std::vector<std::pair<double, double>> points;  // (mark, probability)

  bool operator==(const DiscreteMarks&) const = default;
};
using MarkDistribution = std::variant<PointMass, UniformMarks, DiscreteMarks>;

// Jump-size functions h(y) / j(y).
struct ConstantJump {
  double c = 0.0;

  bool operator==(const ConstantJump&) const = default;
};
/// Linear interpolation through (mark, value) knots, constant beyond the end knots.
struct PiecewiseLinearJump {
  std::vector<std::pair<double, double>> knots;

  bool operator==(const PiecewiseLinearJump&) const = default;
};
using JumpFunction = std::variant<ConstantJump, PiecewiseLinearJump>;

/**
 * Finite-activity jump measure: total mass nu(R), mark law nu/nu(R) and the
 * jump function. Construction validates every invariant; an invalid spec
 * never exists.
 */
class JumpSpec {
 public:
  JumpSpec();  // no jumps
  JumpSpec(double total_mass, MarkDistribution marks, JumpFunction fn,
           bool nonnegative = false);

  static JumpSpec none() { return {}; }
  static JumpSpec constant(double total_mass, double c, bool nonnegative = false) {
    return JumpSpec(total_mass, PointMass{0.0}, ConstantJump{c}, nonnegative);
  }

  double total_mass() const { return total_mass_; }
  const MarkDistribution& marks() const { return marks_; }
  const JumpFunction& function() const { return fn_; }
  bool nonnegative() const { return nonnegative_; }

  /// Jump function evaluated at a mark.
  double operator()(double mark) const;

  /// Smallest and largest value of the jump function over the mark support.
  std::pair<double, double> range() const;

  double draw_mark(RngStream& stream) const;

  /// Quadrature nodes (mark, weight) for integrals against nu; weights sum to total_mass.
  /// Point/discrete marks are exact; uniform marks use 32-point Gauss-Legendre.
  std::vector<std::pair<double, double>> measure_nodes() const;

  bool operator==(const JumpSpec&) const = default;

 private:
  double total_mass_;
  MarkDistribution marks_;
  JumpFunction fn_;
  bool nonnegative_;
};

struct JumpIntegrals {
  double int_h = 0.0;     // integral of h against nu
  double int_h_sq = 0.0;  // integral of h^2 against nu
};

struct JumpEvent {
  double time;
  double mark;
};

/// Normal(0, dt) draw. Throws std::invalid_argument for dt <= 0.
double sample_brownian_increment(RngStream& stream, double dt);

/// Compound-Poisson events on (t0, t1] with rate spec.total_mass(), times strictly increasing.
std::vector<JumpEvent> sample_jump_events(RngStream& stream, const JumpSpec& spec,
                                          double t0, double t1);

JumpIntegrals compute_jump_integrals(const JumpSpec& spec);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_STOCHASTIC_KERNEL_HPP
