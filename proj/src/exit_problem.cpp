#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "levy_epidemic/analysis.hpp"
#include "levy_epidemic/errors.hpp"
#include "levy_epidemic/parallel.hpp"

namespace levy_epi {

void ExitProblem::validate() const {
  if (!(x1 > 0.0 && x1 < x2 && x2 < 1.0)) {
    throw std::invalid_argument("exit window needs 0 < x1 < x2 < 1");
  }
  if (grid_n < 100) throw std::invalid_argument("exit problem needs grid_n >= 100");
  params.validate();
}

double ExitSolution::at(double x) const {
  if (x <= grid.front()) return u.front();
  if (x >= grid.back()) return u.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), x) - grid.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return u[lo] + w * (u[hi] - u[lo]);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Solver = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

// Uniform nodes i/grid_n with x1 and x2 inserted so the absorbing edges sit on nodes.
std::vector<double> build_grid(const ExitProblem& prob) {
  std::vector<double> nodes;
  nodes.reserve(prob.grid_n + 3);
  const double h = 1.0 / static_cast<double>(prob.grid_n);
  for (std::size_t i = 0; i <= prob.grid_n; ++i) {
    const double x = static_cast<double>(i) * h;
    // Drop uniform nodes that would crowd the inserted edges.
    if (std::abs(x - prob.x1) < 1e-3 * h || std::abs(x - prob.x2) < 1e-3 * h) continue;
    nodes.push_back(x);
  }
  nodes.push_back(prob.x1);
  nodes.push_back(prob.x2);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

// Higham's variant of Hager's estimator for ||A^{-1}||_1.
double inverse_norm1_estimate(Solver& lu, Eigen::Index n) {
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = lu.solve(x);
    estimate = y.lpNorm<1>();
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd z = lu.transpose().solve(xi);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (zmax <= z.dot(x)) break;
    x.setZero();
    x(j) = 1.0;
  }
  return estimate;
}

double norm1(const SpMat& a) {
  double best = 0.0;
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    double col = 0.0;
    for (SpMat::InnerIterator it(a, c); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

}  // namespace

ExitSolution solve_exit_probability(const ExitProblem& prob, double x0) {
  prob.validate();
  const SisParams& p = prob.params;

  ExitSolution sol;
  sol.grid = build_grid(prob);
  const std::vector<double>& xs = sol.grid;
  const std::size_t n_nodes = xs.size();

  // Unknowns are the nodes strictly inside (x1, x2).
  const auto first = static_cast<std::size_t>(std::find(xs.begin(), xs.end(), prob.x1) - xs.begin()) + 1;
  const auto last = static_cast<std::size_t>(std::find(xs.begin(), xs.end(), prob.x2) - xs.begin());
  const auto n_unknown = static_cast<Eigen::Index>(last - first);

  sol.u.assign(n_nodes, 0.0);
  for (std::size_t k = last; k < n_nodes; ++k) sol.u[k] = 1.0;
  if (n_unknown == 0) {
    sol.pi_up = sol.at(x0);
    return sol;
  }

  const auto measure = p.jumps.measure_nodes();
  double total_rate = 0.0;
  for (const auto& [y, w] : measure) total_rate += w;

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unknown);

  for (std::size_t g = first; g < last; ++g) {
    const auto row = static_cast<Eigen::Index>(g - first);
    // Adds coefficient * u(node k) to the row, moving known boundary values to the rhs.
    auto add = [&](std::size_t k, double coefficient) {
      if (k < first || k >= last) {
        rhs(row) -= coefficient * sol.u[k];
      } else {
        triplets.emplace_back(row, static_cast<Eigen::Index>(k - first), coefficient);
      }
    };

    const double x = xs[g];
    const double hm = x - xs[g - 1];
    const double hp = xs[g + 1] - x;
    const double drift = sis_drift(p, x);
    const double half_var = 0.5 * sis_diffusion(p, x) * sis_diffusion(p, x);

    // Three-point stencils on a possibly uneven spacing.
    add(g - 1, drift * (-hp / (hm * (hm + hp))) + half_var * 2.0 / (hm * (hm + hp)));
    add(g, drift * ((hp - hm) / (hm * hp)) - half_var * 2.0 / (hm * hp) - total_rate);
    add(g + 1, drift * (hm / (hp * (hm + hp))) + half_var * 2.0 / (hp * (hm + hp)));

    for (const auto& [mark, weight] : measure) {
      const double z = x + p.jumps(mark) * x * (1.0 - x);
      if (z <= prob.x1) continue;
      if (z >= prob.x2) {
        rhs(row) -= weight;
        continue;
      }
      const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), z) - xs.begin());
      const std::size_t lo = hi - 1;
      const double theta = (z - xs[lo]) / (xs[hi] - xs[lo]);
      add(lo, weight * (1.0 - theta));
      add(hi, weight * theta);
    }
  }

  SpMat a(n_unknown, n_unknown);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  Solver lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "exit-probability system is singular (" << lu.lastErrorMessage() << ")";
    throw NumericalFailure(msg.str(), std::numeric_limits<double>::infinity());
  }
  sol.condition_estimate = norm1(a) * inverse_norm1_estimate(lu, n_unknown);
  constexpr double kMaxCondition = 1e13;
  if (!std::isfinite(sol.condition_estimate) || sol.condition_estimate > kMaxCondition) {
    std::ostringstream msg;
    msg << "exit-probability system is ill-conditioned (cond1 ~ " << sol.condition_estimate << ")";
    throw NumericalFailure(msg.str(), sol.condition_estimate);
  }

  const Eigen::VectorXd interior = lu.solve(rhs);
  for (Eigen::Index k = 0; k < n_unknown; ++k) {
    sol.u[first + static_cast<std::size_t>(k)] = interior(k);
  }
  sol.pi_up = sol.at(x0);
  return sol;
}

namespace {

enum class ExitSide { Inside, Up, Down };

class ExitObserver {
 public:
  ExitObserver(double x1, double x2) : x1_(x1), x2_(x2) {}

  bool on_grid(std::size_t, double, const SimplexState& x) { return see(x); }
  bool on_jump(double, double, const SimplexState& pre, const SimplexState& post) {
    return see(pre) && see(post);
  }
  ExitSide side() const { return side_; }

 private:
  bool see(const SimplexState& x) {
    if (x.S() >= x2_) side_ = ExitSide::Up;
    else if (x.S() <= x1_) side_ = ExitSide::Down;
    return side_ == ExitSide::Inside;
  }

  double x1_;
  double x2_;
  ExitSide side_ = ExitSide::Inside;
};

}  // namespace

ExitEstimate mc_exit_probability(const ExitProblem& prob, double x0, const SimConfig& cfg,
                                 std::size_t n_paths, std::size_t threads) {
  prob.validate();
  cfg.validate();
  if (!(x0 > prob.x1 && x0 < prob.x2)) {
    throw std::invalid_argument("Monte Carlo exit needs x1 < x0 < x2");
  }
  if (n_paths < 1) throw std::invalid_argument("Monte Carlo exit needs n_paths >= 1");
  const SimplexState start(x0, 1.0 - x0);

  std::vector<ExitSide> sides(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t i) {
    RngStream stream(cfg.seed, i);
    ExitObserver obs(prob.x1, prob.x2);
    detail::run_path(prob.params, start, cfg, stream, obs);
    sides[i] = obs.side();
  });

  ExitEstimate e;
  for (ExitSide s : sides) {
    if (s == ExitSide::Up) ++e.n_up;
    else if (s == ExitSide::Down) ++e.n_down;
    else ++e.censored;
  }
  const std::size_t decided = e.n_up + e.n_down;
  if (decided > 0) {
    e.probability = static_cast<double>(e.n_up) / static_cast<double>(decided);
    e.standard_error = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(decided));
  }
  return e;
}

std::vector<double> sweep_exit_probability(const SisParams& params,
                                           const std::vector<std::pair<double, double>>& windows,
                                           double x0, std::size_t grid_n) {
  std::vector<double> out;
  out.reserve(windows.size());
  for (const auto& [x1, x2] : windows) {
    ExitProblem prob{x1, x2, grid_n, params};
    out.push_back(solve_exit_probability(prob, x0).pi_up);
  }
  return out;
}

}  // namespace levy_epi
