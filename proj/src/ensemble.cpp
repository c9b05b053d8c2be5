#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>

#include "levy_epidemic/analysis.hpp"
#include "levy_epidemic/parallel.hpp"

namespace levy_epi {

namespace {

struct PathOutcome {
  SimplexState terminal;
  std::optional<double> hit_time;
  StepStats stats;
};

// Tracks the latest state and, optionally, the first time S >= 1 - epsilon.
class TerminalObserver {
 public:
  explicit TerminalObserver(std::optional<double> epsilon) : epsilon_(epsilon) {}

  bool on_grid(std::size_t, double t, const SimplexState& x) { return see(t, x); }
  bool on_jump(double t, double, const SimplexState& pre, const SimplexState& post) {
    return see(t, pre) && see(t, post);
  }

  const SimplexState& last() const { return last_; }
  std::optional<double> hit_time() const { return hit_; }

 private:
  bool see(double t, const SimplexState& x) {
    last_ = x;
    if (epsilon_ && x.S() >= 1.0 - *epsilon_) {
      hit_ = t;
      return false;
    }
    return true;
  }

  std::optional<double> epsilon_;
  SimplexState last_;
  std::optional<double> hit_;
};

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return v[lo] + w * (v[hi] - v[lo]);
}

template <class Params>
PathOutcome run_one(const Params& p, const SimplexState& x0, const SimConfig& cfg,
                    std::uint64_t stream_index, std::optional<double> epsilon) {
  RngStream stream(cfg.seed, stream_index);
  TerminalObserver obs(epsilon);
  PathOutcome out;
  out.stats = detail::run_path(p, x0, cfg, stream, obs);
  out.terminal = obs.last();
  out.hit_time = obs.hit_time();
  return out;
}

struct SampleMoments {
  double mean = 0.0;
  double se = 0.0;
};

SampleMoments moments(const std::vector<double>& v) {
  SampleMoments m;
  const auto n = static_cast<double>(v.size());
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

}  // namespace

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double level) {
  if (n == 0 || k > n) throw std::invalid_argument("clopper_pearson needs 0 <= k <= n, n > 0");
  const double alpha = 1.0 - level;
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  double lo = 0.0;
  double hi = 1.0;
  if (k > 0) lo = boost::math::quantile(boost::math::beta_distribution<>(kk, nn - kk + 1.0), alpha / 2);
  if (k < n) hi = boost::math::quantile(boost::math::beta_distribution<>(kk + 1.0, nn - kk), 1.0 - alpha / 2);
  return {lo, hi};
}

EnsembleSummary run_ensemble(const ModelParams& params, const SimplexState& x0,
                             const SimConfig& cfg, const EnsembleOptions& opts) {
  cfg.validate();
  if (opts.n_paths < 1) throw std::invalid_argument("ensemble needs n_paths >= 1");
  if (!(opts.i_threshold > 0.0 && opts.i_threshold < 1.0)) {
    throw std::invalid_argument("i_threshold must lie in (0, 1)");
  }
  if (opts.epsilon && !(*opts.epsilon > 0.0 && *opts.epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (!opts.stream_indices.empty() && opts.stream_indices.size() != opts.n_paths) {
    throw std::invalid_argument("stream_indices must have one entry per path");
  }
  std::visit(
      [&](const auto& p) {
        p.validate();
        check_initial_state(p, x0);
      },
      params);

  std::vector<PathOutcome> outcomes(opts.n_paths);
  parallel_for(opts.n_paths, opts.threads, [&](std::size_t i) {
    const std::uint64_t index = opts.stream_indices.empty() ? i : opts.stream_indices[i];
    outcomes[i] = std::visit(
        [&](const auto& p) { return run_one(p, x0, cfg, index, opts.epsilon); }, params);
  });

  EnsembleSummary s;
  s.n_paths = opts.n_paths;
  std::vector<double> terminal_i;
  std::vector<double> hits;
  terminal_i.reserve(outcomes.size());
  for (const PathOutcome& o : outcomes) {
    terminal_i.push_back(o.terminal.I());
    if (o.terminal.I() < opts.i_threshold) ++s.extinct_count;
    if (o.hit_time) hits.push_back(*o.hit_time);
    s.stats.merge(o.stats);
  }
  s.extinction_fraction = static_cast<double>(s.extinct_count) / static_cast<double>(s.n_paths);
  std::tie(s.extinction_ci_low, s.extinction_ci_high) = clopper_pearson(s.extinct_count, s.n_paths);

  std::sort(terminal_i.begin(), terminal_i.end());
  s.terminal_i_q05 = quantile_sorted(terminal_i, 0.05);
  s.terminal_i_q50 = quantile_sorted(terminal_i, 0.50);
  s.terminal_i_q95 = quantile_sorted(terminal_i, 0.95);

  if (opts.epsilon) {
    s.hit_count = hits.size();
    s.censored_count = s.n_paths - s.hit_count;
    const SampleMoments m = moments(hits);
    s.mean_hitting_time = hits.empty() ? std::numeric_limits<double>::quiet_NaN() : m.mean;
    s.hitting_time_se = m.se;
  }
  return s;
}

EnsembleSummary estimate_extinction(const ModelParams& params, const SimplexState& x0,
                                    const SimConfig& cfg, std::size_t n_paths,
                                    double i_threshold, std::size_t threads) {
  EnsembleOptions opts;
  opts.n_paths = n_paths;
  opts.i_threshold = i_threshold;
  opts.threads = threads;
  return run_ensemble(params, x0, cfg, opts);
}

EnsembleSummary estimate_hitting_time(const ModelParams& params, const SimplexState& x0,
                                      double epsilon, const SimConfig& cfg,
                                      std::size_t n_paths, std::size_t threads) {
  EnsembleOptions opts;
  opts.n_paths = n_paths;
  opts.epsilon = epsilon;
  opts.threads = threads;
  return run_ensemble(params, x0, cfg, opts);
}

// ------------------------------------------------------------ Dynkin check

namespace {

template <class Params, class TestFn>
DynkinResult dynkin_impl(const Params& p, const SimplexState& x, const DynkinOptions& opts,
                         TestFn&& g, double analytic) {
  if (!(opts.dt_probe > 0.0)) throw std::invalid_argument("dt_probe must be > 0");
  if (opts.n_samples < 2) throw std::invalid_argument("Dynkin check needs n_samples >= 2");
  if (!x.on_simplex() || x.size() != detail::state_size(p)) {
    throw std::invalid_argument("Dynkin probe state must lie on the simplex");
  }
  SimConfig cfg;
  cfg.t_end = opts.dt_probe;
  cfg.dt = opts.dt_probe;
  cfg.seed = opts.seed;

  const double g0 = g(x);
  std::vector<double> quotients(opts.n_samples);
  parallel_for(opts.n_samples, opts.threads, [&](std::size_t i) {
    RngStream stream(opts.seed, i);
    TerminalObserver obs(std::nullopt);
    detail::run_path(p, x, cfg, stream, obs);
    quotients[i] = (g(obs.last()) - g0) / opts.dt_probe;
  });

  const SampleMoments m = moments(quotients);
  DynkinResult r;
  r.mc_estimate = m.mean;
  r.analytic = analytic;
  r.standard_error = m.se;
  const double diff = r.mc_estimate - r.analytic;
  if (m.se > 0.0) {
    r.z_score = diff / m.se;
  } else {
    r.z_score = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return r;
}

}  // namespace

DynkinResult dynkin_check_sis_g(const SisParams& p, const SimplexState& x,
                                const DynkinOptions& opts) {
  p.validate();
  return dynkin_impl(
      p, x, opts, [](const SimplexState& y) { return sis_lyapunov_g(y.S()); },
      sis_generator_g(p, x.S()));
}

DynkinResult dynkin_check_sirs_f(const SirsParams& p, const LyapunovConstants& c,
                                 const SimplexState& x, const DynkinOptions& opts) {
  p.validate();
  return dynkin_impl(
      p, x, opts, [&c](const SimplexState& y) { return sirs_lyapunov_f(c, y); },
      sirs_generator_f(p, c, x));
}

}  // namespace levy_epi
