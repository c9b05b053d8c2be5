#include "levy_epidemic/integrator.hpp"

namespace levy_epi {

std::string to_string(BoundaryPolicy policy) {
  return policy == BoundaryPolicy::Clamp ? "clamp" : "reject_step";
}

BoundaryPolicy boundary_policy_from_string(const std::string& name) {
  if (name == "clamp") return BoundaryPolicy::Clamp;
  if (name == "reject_step") return BoundaryPolicy::RejectStep;
  throw std::invalid_argument("unknown boundary policy '" + name + "'");
}

void SimConfig::validate() const {
  if (!(std::isfinite(t_end) && t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (!(std::isfinite(dt) && dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (dt > t_end) throw std::invalid_argument("dt must not exceed t_end");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
}

std::size_t SimConfig::grid_steps() const {
  // Tolerate t_end/dt landing a hair above an integer.
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

double SimConfig::grid_time(std::size_t k) const {
  return k >= grid_steps() ? t_end : static_cast<double>(k) * dt;
}

void StepStats::merge(const StepStats& other) {
  moves += other.moves;
  interventions += other.interventions;
  max_sum_error = std::max(max_sum_error, other.max_sum_error);
}

namespace {

template <class Params>
SimplexState step_impl(const Params& p, const SimplexState& state, double dt, double dW,
                       std::span<const double> marks, BoundaryPolicy policy,
                       StepStats* stats) {
  if (!(dt > 0.0)) throw std::invalid_argument("step needs dt > 0");
  StepStats local;
  StepStats& s = stats ? *stats : local;
  SimplexState x = state;
  detail::euler_move(p, x, dt, dW);
  ++s.moves;
  detail::enforce_boundary(x, state, policy, s);
  for (double mark : marks) {
    const SimplexState pre = x;
    detail::apply_jump(p, x, mark);
    detail::enforce_boundary(x, pre, policy, s);
  }
  return x;
}

template <class Params>
void check_initial_impl(const Params& p, const SimplexState& x0) {
  if (x0.size() != detail::state_size(p)) {
    throw std::invalid_argument("initial state has the wrong number of compartments");
  }
  if (!x0.on_simplex()) throw std::invalid_argument("initial state is not on the simplex");
  if (!p.deterministic() && !x0.interior()) {
    throw std::invalid_argument("stochastic runs need an initial state inside the simplex");
  }
}

class Recorder {
 public:
  Recorder(Trajectory& out, std::size_t stride, std::size_t last)
      : out_(out), stride_(stride), last_(last) {}

  bool on_grid(std::size_t k, double t, const SimplexState& x) {
    if (k % stride_ != 0 && k != last_) return true;
    // A jump landing exactly on a grid time was already recorded with this state.
    if (!out_.times.empty() && out_.times.back() == t) return true;
    push(t, x, 0);
    return true;
  }

  bool on_jump(double t, double mark, const SimplexState& pre, const SimplexState& post) {
    out_.jump_marks.push_back({t, mark, pre});
    push(t, post, 1);
    return true;
  }

 private:
  void push(double t, const SimplexState& x, std::uint8_t jumped) {
    out_.times.push_back(t);
    out_.states.push_back(x);
    out_.jumped.push_back(jumped);
  }

  Trajectory& out_;
  std::size_t stride_;
  std::size_t last_;
};

template <class Params>
Trajectory simulate_impl(const Params& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream) {
  p.validate();
  cfg.validate();
  check_initial_impl(p, x0);
  Trajectory traj;
  const std::size_t n = cfg.grid_steps();
  traj.times.reserve(n / cfg.record_stride + 2);
  traj.states.reserve(n / cfg.record_stride + 2);
  Recorder rec(traj, cfg.record_stride, n);
  traj.stats = detail::run_path(p, x0, cfg, stream, rec);
  traj.clamp_count = traj.stats.interventions;
  return traj;
}

}  // namespace

SimplexState step(const SisParams& p, const SimplexState& state, double dt, double dW,
                  std::span<const double> marks_at_end, BoundaryPolicy policy,
                  StepStats* stats) {
  return step_impl(p, state, dt, dW, marks_at_end, policy, stats);
}

SimplexState step(const SirsParams& p, const SimplexState& state, double dt, double dW,
                  std::span<const double> marks_at_end, BoundaryPolicy policy,
                  StepStats* stats) {
  return step_impl(p, state, dt, dW, marks_at_end, policy, stats);
}

void check_initial_state(const SisParams& p, const SimplexState& x0) {
  check_initial_impl(p, x0);
}
void check_initial_state(const SirsParams& p, const SimplexState& x0) {
  check_initial_impl(p, x0);
}

Trajectory simulate_path(const SisParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream) {
  return simulate_impl(p, x0, cfg, stream);
}

Trajectory simulate_path(const SirsParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream) {
  return simulate_impl(p, x0, cfg, stream);
}

Trajectory simulate_path(const ModelParams& p, const SimplexState& x0, const SimConfig& cfg,
                         RngStream& stream) {
  return std::visit([&](const auto& params) { return simulate_path(params, x0, cfg, stream); },
                    p);
}

}  // namespace levy_epi
