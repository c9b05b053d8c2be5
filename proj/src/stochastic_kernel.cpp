#include "levy_epidemic/stochastic_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace levy_epi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

double interpolate(const PiecewiseLinearJump& f, double y) {
  const auto& k = f.knots;
  if (y <= k.front().first) return k.front().second;
  if (y >= k.back().first) return k.back().second;
  auto hi = std::upper_bound(k.begin(), k.end(), y,
                             [](double v, const auto& knot) { return v < knot.first; });
  auto lo = hi - 1;
  const double w = (y - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

// Breakpoints of the jump function restricted to [a, b], including both ends.
std::vector<double> breakpoints(const JumpFunction& fn, double a, double b) {
  std::vector<double> pts{a};
  if (const auto* pw = std::get_if<PiecewiseLinearJump>(&fn)) {
    for (const auto& [y, v] : pw->knots) {
      if (y > a && y < b) pts.push_back(y);
    }
  }
  pts.push_back(b);
  return pts;
}

}  // namespace

// ---------------------------------------------------------------- RngStream

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : RngStream(master_seed, stream_index, {}) {}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_index,
                     std::vector<std::uint64_t> path)
    : master_seed_(master_seed), stream_index_(stream_index), path_(std::move(path)) {
  seed_engine();
}

void RngStream::seed_engine() {
  std::vector<std::uint32_t> words{lo32(master_seed_), hi32(master_seed_),
                                   lo32(stream_index_), hi32(stream_index_),
                                   static_cast<std::uint32_t>(path_.size())};
  for (std::uint64_t tag : path_) {
    words.push_back(lo32(tag));
    words.push_back(hi32(tag));
  }
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

RngStream RngStream::substream(std::uint64_t tag) const {
  auto path = path_;
  path.push_back(tag);
  return RngStream(master_seed_, stream_index_, std::move(path));
}

void RngStream::reset() { seed_engine(); }

double RngStream::standard_normal() {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

double RngStream::uniform01() {
  boost::random::uniform_01<double> dist;
  return dist(engine_);
}

double RngStream::exponential(double rate) {
  boost::random::exponential_distribution<double> dist(rate);
  return dist(engine_);
}

// ----------------------------------------------------------------- JumpSpec

JumpSpec::JumpSpec() : JumpSpec(0.0, PointMass{0.0}, ConstantJump{0.0}, false) {}

JumpSpec::JumpSpec(double total_mass, MarkDistribution marks, JumpFunction fn,
                   bool nonnegative)
    : total_mass_(total_mass),
      marks_(std::move(marks)),
      fn_(std::move(fn)),
      nonnegative_(nonnegative) {
  if (!std::isfinite(total_mass_) || total_mass_ < 0.0) {
    throw std::invalid_argument("jump total mass must be finite and non-negative");
  }
  std::visit(overloaded{
                 [](const PointMass& m) {
                   if (!std::isfinite(m.y0)) throw std::invalid_argument("point mark must be finite");
                 },
                 [](const UniformMarks& m) {
                   if (!(std::isfinite(m.a) && std::isfinite(m.b) && m.a < m.b)) {
                     throw std::invalid_argument("uniform marks need finite a < b");
                   }
                 },
                 [](const DiscreteMarks& m) {
                   if (m.points.empty()) throw std::invalid_argument("discrete marks are empty");
                   double total = 0.0;
                   for (const auto& [y, p] : m.points) {
                     if (!std::isfinite(y) || !(p >= 0.0)) {
                       throw std::invalid_argument("discrete marks need finite y and p >= 0");
                     }
                     total += p;
                   }
                   if (std::abs(total - 1.0) > 1e-12) {
                     throw std::invalid_argument("discrete mark probabilities must sum to 1");
                   }
                 },
             },
             marks_);
  if (const auto* pw = std::get_if<PiecewiseLinearJump>(&fn_)) {
    if (pw->knots.empty()) throw std::invalid_argument("piecewise-linear jump needs knots");
    for (std::size_t i = 1; i < pw->knots.size(); ++i) {
      if (!(pw->knots[i].first > pw->knots[i - 1].first)) {
        throw std::invalid_argument("piecewise-linear knots must be strictly increasing");
      }
    }
  }
  const auto [lo, hi] = range();
  if (!(lo > -1.0 && hi < 1.0)) {
    throw std::invalid_argument("jump function must lie in (-1, 1) on the mark support");
  }
  if (nonnegative_ && lo < 0.0) {
    throw std::invalid_argument("jump function flagged nonnegative takes negative values");
  }
}

double JumpSpec::operator()(double mark) const {
  return std::visit(overloaded{
                        [](const ConstantJump& f) { return f.c; },
                        [mark](const PiecewiseLinearJump& f) { return interpolate(f, mark); },
                    },
                    fn_);
}

std::pair<double, double> JumpSpec::range() const {
  std::vector<double> support = std::visit(
      overloaded{
          [](const PointMass& m) { return std::vector<double>{m.y0}; },
          [this](const UniformMarks& m) { return breakpoints(fn_, m.a, m.b); },
          [](const DiscreteMarks& m) {
            std::vector<double> ys;
            for (const auto& [y, p] : m.points) ys.push_back(y);
            return ys;
          },
      },
      marks_);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double y : support) {
    const double v = (*this)(y);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

double JumpSpec::draw_mark(RngStream& stream) const {
  return std::visit(overloaded{
                        [](const PointMass& m) { return m.y0; },
                        [&stream](const UniformMarks& m) {
                          return m.a + (m.b - m.a) * stream.uniform01();
                        },
                        [&stream](const DiscreteMarks& m) {
                          const double u = stream.uniform01();
                          double acc = 0.0;
                          for (const auto& [y, p] : m.points) {
                            acc += p;
                            if (u < acc) return y;
                          }
                          return m.points.back().first;
                        },
                    },
                    marks_);
}

std::vector<std::pair<double, double>> JumpSpec::measure_nodes() const {
  const double mass = total_mass_;
  return std::visit(
      overloaded{
          [mass](const PointMass& m) {
            return std::vector<std::pair<double, double>>{{m.y0, mass}};
          },
          [mass](const UniformMarks& m) {
            using rule = boost::math::quadrature::gauss<double, 32>;
            const auto& x = rule::abscissa();
            const auto& w = rule::weights();
            const double half = 0.5 * (m.b - m.a);
            const double mid = 0.5 * (m.a + m.b);
            // Weights integrate over [-1,1] (sum 2); the uniform density is 1/(b-a).
            std::vector<std::pair<double, double>> nodes;
            for (std::size_t i = 0; i < x.size(); ++i) {
              const double wi = 0.5 * w[i] * mass;
              nodes.emplace_back(mid - half * x[i], wi);
              if (x[i] != 0.0) nodes.emplace_back(mid + half * x[i], wi);
            }
            std::sort(nodes.begin(), nodes.end());
            return nodes;
          },
          [mass](const DiscreteMarks& m) {
            std::vector<std::pair<double, double>> nodes;
            for (const auto& [y, p] : m.points) nodes.emplace_back(y, p * mass);
            return nodes;
          },
      },
      marks_);
}

// --------------------------------------------------------------- operations

double sample_brownian_increment(RngStream& stream, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("Brownian increment needs dt > 0");
  return std::sqrt(dt) * stream.standard_normal();
}

std::vector<JumpEvent> sample_jump_events(RngStream& stream, const JumpSpec& spec,
                                          double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("jump window needs t1 > t0");
  std::vector<JumpEvent> events;
  const double rate = spec.total_mass();
  if (rate == 0.0) return events;
  double t = t0;
  while (true) {
    const double next = t + stream.exponential(rate);
    if (next > t1) break;
    // Two arrivals can round onto the same double; keep times strictly increasing.
    t = next > t ? next : std::nextafter(t, t1);
    events.push_back({t, spec.draw_mark(stream)});
  }
  return events;
}

JumpIntegrals compute_jump_integrals(const JumpSpec& spec) {
  const double mass = spec.total_mass();
  if (const auto* c = std::get_if<ConstantJump>(&spec.function())) {
    return {c->c * mass, c->c * c->c * mass};
  }
  return std::visit(
      overloaded{
          [&](const PointMass& m) {
            const double v = spec(m.y0);
            return JumpIntegrals{v * mass, v * v * mass};
          },
          [&](const DiscreteMarks& m) {
            JumpIntegrals out;
            for (const auto& [y, p] : m.points) {
              const double v = spec(y);
              out.int_h += p * mass * v;
              out.int_h_sq += p * mass * v * v;
            }
            return out;
          },
          [&](const UniformMarks& m) {
            // Exact on each linear piece: trapezoid for h, Simpson-type closed form for h^2.
            const auto pts = breakpoints(spec.function(), m.a, m.b);
            const double density = mass / (m.b - m.a);
            JumpIntegrals out;
            for (std::size_t i = 1; i < pts.size(); ++i) {
              const double len = pts[i] - pts[i - 1];
              const double hl = spec(pts[i - 1]);
              const double hr = spec(pts[i]);
              out.int_h += density * len * 0.5 * (hl + hr);
              out.int_h_sq += density * len * (hl * hl + hl * hr + hr * hr) / 3.0;
            }
            return out;
          },
      },
      spec.marks());
}

}  // namespace levy_epi
