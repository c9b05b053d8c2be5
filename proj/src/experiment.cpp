#include "levy_epidemic/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "levy_epidemic/errors.hpp"

namespace levy_epi {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ------------------------------------------------------------ enum names

const std::vector<std::pair<ModelKind, std::string>> kModelNames = {
    {ModelKind::Sis, "sis"},
    {ModelKind::Sirs, "sirs"},
    {ModelKind::SisDeterministic, "sis_deterministic"},
    {ModelKind::SirsDeterministic, "sirs_deterministic"},
};

const std::vector<std::pair<TaskKind, std::string>> kTaskNames = {
    {TaskKind::Simulate, "simulate"},
    {TaskKind::Ensemble, "ensemble"},
    {TaskKind::Stability, "stability"},
    {TaskKind::ExitProb, "exit_prob"},
    {TaskKind::GeneratorCheck, "generator_check"},
    {TaskKind::ReproduceFigures, "reproduce_figures"},
};

template <class E>
E parse_enum(const std::vector<std::pair<E, std::string>>& table, const std::string& name,
             const char* what) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + name + "'");
}

bool is_sirs(ModelKind m) { return m == ModelKind::Sirs || m == ModelKind::SirsDeterministic; }
bool is_deterministic(ModelKind m) {
  return m == ModelKind::SisDeterministic || m == ModelKind::SirsDeterministic;
}

// ------------------------------------------------------------ json access

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double get_real(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("'" + key + "' in " + where + " must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) {
    throw ConfigError("'" + key + "' in " + where + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError("'" + key + "' in " + where + " must be a string");
  return v.get<std::string>();
}

std::vector<std::pair<double, double>> get_pairs(const json& j, const std::string& key,
                                                 const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ConfigError("'" + key + "' in " + where + " must be an array of [x, y] pairs");
  }
  std::vector<std::pair<double, double>> out;
  for (const json& item : j.at(key)) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
      throw ConfigError("'" + key + "' in " + where + " must hold [x, y] number pairs");
    }
    out.emplace_back(item[0].get<double>(), item[1].get<double>());
  }
  return out;
}

std::vector<double> get_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (const json& item : v) {
    if (!item.is_number()) throw ConfigError(where + " must be an array of numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

// ------------------------------------------------------------ sections

JumpSpec parse_jumps(const json& j) {
  const std::string where = "jumps";
  require_object(j, where);
  reject_unknown(j, {"mass", "marks", "function", "nonnegative"}, where);
  const double mass = get_real(j, "mass", where);

  if (!j.contains("marks")) throw ConfigError("missing key 'marks' in jumps");
  const json& m = j.at("marks");
  require_object(m, "jumps.marks");
  const std::string mtype = get_string(m, "type", "jumps.marks");
  MarkDistribution marks;
  if (mtype == "point_mass") {
    reject_unknown(m, {"type", "y0"}, "jumps.marks");
    marks = PointMass{get_real(m, "y0", "jumps.marks")};
  } else if (mtype == "uniform") {
    reject_unknown(m, {"type", "a", "b"}, "jumps.marks");
    marks = UniformMarks{get_real(m, "a", "jumps.marks"), get_real(m, "b", "jumps.marks")};
  } else if (mtype == "discrete") {
    reject_unknown(m, {"type", "points"}, "jumps.marks");
    marks = DiscreteMarks{get_pairs(m, "points", "jumps.marks")};
  } else {
    throw ConfigError("unknown mark distribution '" + mtype + "'");
  }

  if (!j.contains("function")) throw ConfigError("missing key 'function' in jumps");
  const json& f = j.at("function");
  require_object(f, "jumps.function");
  const std::string ftype = get_string(f, "type", "jumps.function");
  JumpFunction fn;
  if (ftype == "constant") {
    reject_unknown(f, {"type", "c"}, "jumps.function");
    fn = ConstantJump{get_real(f, "c", "jumps.function")};
  } else if (ftype == "piecewise_linear") {
    reject_unknown(f, {"type", "knots"}, "jumps.function");
    fn = PiecewiseLinearJump{get_pairs(f, "knots", "jumps.function")};
  } else {
    throw ConfigError("unknown jump function '" + ftype + "'");
  }

  bool nonnegative = false;
  if (j.contains("nonnegative")) {
    if (!j.at("nonnegative").is_boolean()) throw ConfigError("'nonnegative' must be a boolean");
    nonnegative = j.at("nonnegative").get<bool>();
  }
  try {
    return JumpSpec(mass, std::move(marks), std::move(fn), nonnegative);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid jumps: ") + e.what());
  }
}

json jumps_to_json(const JumpSpec& spec) {
  json j;
  j["mass"] = spec.total_mass();
  j["marks"] = std::visit(
      overloaded{
          [](const PointMass& m) { return json{{"type", "point_mass"}, {"y0", m.y0}}; },
          [](const UniformMarks& m) { return json{{"type", "uniform"}, {"a", m.a}, {"b", m.b}}; },
          [](const DiscreteMarks& m) { return json{{"type", "discrete"}, {"points", m.points}}; },
      },
      spec.marks());
  j["function"] = std::visit(
      overloaded{
          [](const ConstantJump& f) { return json{{"type", "constant"}, {"c", f.c}}; },
          [](const PiecewiseLinearJump& f) {
            return json{{"type", "piecewise_linear"}, {"knots", f.knots}};
          },
      },
      spec.function());
  j["nonnegative"] = spec.nonnegative();
  return j;
}

ModelParams parse_params(const json& doc, ModelKind model) {
  if (!doc.contains("params")) throw ConfigError("missing section 'params'");
  const json& p = doc.at("params");
  require_object(p, "params");
  const bool det = is_deterministic(model);
  if (det && doc.contains("jumps")) throw ConfigError("deterministic models take no 'jumps' section");
  JumpSpec jumps = doc.contains("jumps") ? parse_jumps(doc.at("jumps")) : JumpSpec();

  if (is_sirs(model)) {
    reject_unknown(p, det ? std::set<std::string>{"beta", "lambda", "delta"}
                          : std::set<std::string>{"beta", "lambda", "delta", "sigma"},
                   "params");
    SirsParams s;
    s.beta = get_real(p, "beta", "params");
    s.lambda = get_real(p, "lambda", "params");
    s.delta = get_real(p, "delta", "params");
    s.sigma = det ? 0.0 : get_real(p, "sigma", "params");
    s.jumps = std::move(jumps);
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid params: ") + e.what());
    }
    return s;
  }
  reject_unknown(p, det ? std::set<std::string>{"beta", "mu", "lambda"}
                        : std::set<std::string>{"beta", "mu", "lambda", "sigma"},
                 "params");
  SisParams s;
  s.beta = get_real(p, "beta", "params");
  s.mu = get_real(p, "mu", "params");
  s.lambda = get_real(p, "lambda", "params");
  s.sigma = det ? 0.0 : get_real(p, "sigma", "params");
  s.jumps = std::move(jumps);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid params: ") + e.what());
  }
  return s;
}

json params_to_json(const ModelParams& params, bool deterministic) {
  return std::visit(overloaded{
                        [&](const SisParams& p) {
                          json j{{"beta", p.beta}, {"mu", p.mu}, {"lambda", p.lambda}};
                          if (!deterministic) j["sigma"] = p.sigma;
                          return j;
                        },
                        [&](const SirsParams& p) {
                          json j{{"beta", p.beta}, {"lambda", p.lambda}, {"delta", p.delta}};
                          if (!deterministic) j["sigma"] = p.sigma;
                          return j;
                        },
                    },
                    params);
}

const JumpSpec& jumps_of(const ModelParams& params) {
  return std::visit([](const auto& p) -> const JumpSpec& { return p.jumps; }, params);
}

SimConfig parse_sim(const json& doc) {
  SimConfig sim;
  if (!doc.contains("sim")) return sim;
  const json& s = doc.at("sim");
  require_object(s, "sim");
  reject_unknown(s, {"t_end", "dt", "seed", "record_stride", "boundary_policy"}, "sim");
  if (s.contains("t_end")) sim.t_end = get_real(s, "t_end", "sim");
  if (s.contains("dt")) sim.dt = get_real(s, "dt", "sim");
  if (s.contains("seed")) sim.seed = get_count(s, "seed", "sim");
  if (s.contains("record_stride")) sim.record_stride = get_count(s, "record_stride", "sim");
  if (s.contains("boundary_policy")) {
    try {
      sim.boundary_policy = boundary_policy_from_string(get_string(s, "boundary_policy", "sim"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid sim: ") + e.what());
  }
  return sim;
}

std::set<std::string> allowed_options(TaskKind task) {
  switch (task) {
    case TaskKind::Simulate:
    case TaskKind::Stability:
      return {};
    case TaskKind::Ensemble:
      return {"n_paths", "i_threshold", "epsilon"};
    case TaskKind::ExitProb:
      return {"x1", "x2", "grid_n", "x0", "n_paths"};
    case TaskKind::GeneratorCheck:
      return {"dt_probe", "n_samples", "states"};
    case TaskKind::ReproduceFigures:
      return {"n_paths"};
  }
  return {};
}

TaskOptions parse_options(const json& doc, TaskKind task) {
  TaskOptions o;
  if (!doc.contains("options")) return o;
  const json& j = doc.at("options");
  const std::string where = "options for task '" + to_string(task) + "'";
  require_object(j, "options");
  reject_unknown(j, allowed_options(task), where);
  if (j.contains("n_paths")) o.n_paths = get_count(j, "n_paths", where);
  if (j.contains("epsilon")) o.epsilon = get_real(j, "epsilon", where);
  if (j.contains("i_threshold")) o.i_threshold = get_real(j, "i_threshold", where);
  if (j.contains("x1")) o.x1 = get_real(j, "x1", where);
  if (j.contains("x2")) o.x2 = get_real(j, "x2", where);
  if (j.contains("grid_n")) o.grid_n = get_count(j, "grid_n", where);
  if (j.contains("x0")) o.x0 = get_real(j, "x0", where);
  if (j.contains("dt_probe")) o.dt_probe = get_real(j, "dt_probe", where);
  if (j.contains("n_samples")) o.n_samples = get_count(j, "n_samples", where);
  if (j.contains("states")) {
    const json& states = j.at("states");
    if (!states.is_array()) throw ConfigError("'states' must be an array of states");
    std::vector<std::vector<double>> list;
    for (const json& s : states) list.push_back(get_vector(s, "each entry of 'states'"));
    o.states = std::move(list);
  }
  return o;
}

void check_task_requirements(const ExperimentConfig& c) {
  const auto need = [&](bool present, const char* key) {
    if (!present) {
      throw ConfigError(std::string("task '") + to_string(c.task) + "' needs options." + key);
    }
  };
  const std::size_t dim = c.model && is_sirs(*c.model) ? 3 : 2;
  auto check_state = [&](const std::vector<double>& coords, const char* what) {
    if (coords.size() != dim) throw ConfigError(std::string(what) + " has the wrong dimension");
    try {
      (void)SimplexState::from(coords);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(what) + ": " + e.what());
    }
  };
  if (!c.initial_state.empty()) check_state(c.initial_state, "initial_state");

  switch (c.task) {
    case TaskKind::Simulate:
      if (c.initial_state.empty()) throw ConfigError("task 'simulate' needs initial_state");
      break;
    case TaskKind::Ensemble:
      if (c.initial_state.empty()) throw ConfigError("task 'ensemble' needs initial_state");
      need(c.options.n_paths.has_value(), "n_paths");
      break;
    case TaskKind::ExitProb:
      if (c.model != ModelKind::Sis) throw ConfigError("task 'exit_prob' needs model 'sis'");
      need(c.options.x1.has_value(), "x1");
      need(c.options.x2.has_value(), "x2");
      need(c.options.x0.has_value(), "x0");
      break;
    case TaskKind::GeneratorCheck:
      if (!c.options.states && c.initial_state.empty()) {
        throw ConfigError("task 'generator_check' needs options.states or initial_state");
      }
      if (c.options.states) {
        for (const auto& s : *c.options.states) check_state(s, "options.states entry");
      }
      break;
    case TaskKind::Stability:
    case TaskKind::ReproduceFigures:
      break;
  }
}

// ------------------------------------------------------------ output

std::string format_real(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fs::filesystem_error("cannot open for writing", path, std::make_error_code(std::errc::io_error));
  out << text;
  if (!out) throw fs::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json error_line(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}};
}

// ------------------------------------------------------------ tasks

SimplexState start_state(const ExperimentConfig& c) { return SimplexState::from(c.initial_state); }

json run_simulate(const ExperimentConfig& c, const fs::path& out) {
  RngStream stream(c.sim.seed, 0);
  const Trajectory traj = simulate_path(*c.params, start_state(c), c.sim, stream);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  write_text(out / "trajectory.csv", csv.str());
  return json{{"rows", traj.times.size()},
              {"jumps", traj.jump_marks.size()},
              {"terminal_state", to_json(traj.terminal())},
              {"clamp_count", traj.clamp_count},
              {"steps", traj.stats.moves},
              {"max_sum_error", traj.stats.max_sum_error}};
}

json run_ensemble_task(const ExperimentConfig& c, std::size_t threads) {
  EnsembleOptions opts;
  opts.n_paths = *c.options.n_paths;
  opts.i_threshold = c.options.i_threshold.value_or(kExtinctionThreshold);
  opts.epsilon = c.options.epsilon;
  opts.threads = threads;
  return json{{"ensemble", to_json(run_ensemble(*c.params, start_state(c), c.sim, opts))},
              {"i_threshold", opts.i_threshold}};
}

json run_stability(const ExperimentConfig& c) {
  json j;
  try {
    j["verdict"] = to_json(panel_verdict(*c.params));
    j["condition_holds"] = j["verdict"]["condition_holds"];
    j["threshold"] = j["verdict"]["threshold"];
    j["applicable"] = true;
  } catch (const NotApplicableError& e) {
    j["applicable"] = false;
    j["reason"] = e.what();
  }
  json eq = json::array();
  const auto equilibria = std::visit([](const auto& p) { return deterministic_equilibria(p); }, *c.params);
  for (const Equilibrium& e : equilibria) {
    eq.push_back(json{{"state", to_json(e.state)}, {"classification", to_string(e.kind)}});
  }
  j["deterministic_equilibria"] = eq;
  if (const auto* sirs = std::get_if<SirsParams>(&*c.params)) {
    try {
      const LyapunovConstants k = find_lyapunov_constants(*sirs);
      j["lyapunov_constants"] = json{{"c1", k.c1}, {"c2", k.c2}, {"c3", k.c3}, {"kappa", k.kappa}};
    } catch (const InfeasibleError&) {
      j["lyapunov_constants"] = nullptr;
    }
  }
  return j;
}

json run_exit(const ExperimentConfig& c, const fs::path& out, std::size_t threads) {
  ExitProblem prob;
  prob.x1 = *c.options.x1;
  prob.x2 = *c.options.x2;
  prob.grid_n = c.options.grid_n.value_or(1000);
  prob.params = std::get<SisParams>(*c.params);
  const double x0 = *c.options.x0;
  const ExitSolution sol = solve_exit_probability(prob, x0);

  std::string csv = "x,u\n";
  for (std::size_t k = 0; k < sol.grid.size(); ++k) {
    csv += format_real("%.9f", sol.grid[k]) + "," + format_real("%.12g", sol.u[k]) + "\n";
  }
  write_text(out / "exit_probability.csv", csv);

  json j{{"x1", prob.x1}, {"x2", prob.x2}, {"x0", x0}, {"grid_n", prob.grid_n},
         {"pi_up", sol.pi_up}, {"condition_estimate", sol.condition_estimate}};
  if (c.options.n_paths) {
    const ExitEstimate mc = mc_exit_probability(prob, x0, c.sim, *c.options.n_paths, threads);
    j["monte_carlo"] = json{{"probability", mc.probability}, {"standard_error", mc.standard_error},
                            {"n_up", mc.n_up}, {"n_down", mc.n_down}, {"censored", mc.censored}};
  }
  return j;
}

json run_generator_check(const ExperimentConfig& c, std::size_t threads) {
  DynkinOptions opts;
  opts.dt_probe = c.options.dt_probe.value_or(1e-3);
  opts.n_samples = c.options.n_samples.value_or(100000);
  opts.seed = c.sim.seed;
  opts.threads = threads;
  const std::vector<std::vector<double>> states =
      c.options.states ? *c.options.states : std::vector<std::vector<double>>{c.initial_state};

  json checks = json::array();
  json constants = nullptr;
  std::optional<LyapunovConstants> k;
  if (const auto* sirs = std::get_if<SirsParams>(&*c.params)) {
    try {
      k = find_lyapunov_constants(*sirs);
    } catch (const InfeasibleError& e) {
      throw ConfigError(std::string("generator_check for SIRS needs feasible constants: ") + e.what());
    }
    constants = json{{"c1", k->c1}, {"c2", k->c2}, {"c3", k->c3}, {"kappa", k->kappa}};
  }
  for (const auto& coords : states) {
    const SimplexState x = SimplexState::from(coords);
    const DynkinResult r = std::visit(
        overloaded{
            [&](const SisParams& p) { return dynkin_check_sis_g(p, x, opts); },
            [&](const SirsParams& p) { return dynkin_check_sirs_f(p, *k, x, opts); },
        },
        *c.params);
    checks.push_back(json{{"state", to_json(x)},
                          {"mc_estimate", r.mc_estimate},
                          {"analytic", r.analytic},
                          {"standard_error", r.standard_error},
                          {"z_score", r.z_score}});
  }
  return json{{"test_function", std::holds_alternative<SisParams>(*c.params) ? "sis_g" : "sirs_f"},
              {"dt_probe", opts.dt_probe},
              {"n_samples", opts.n_samples},
              {"lyapunov_constants", constants},
              {"checks", checks}};
}

}  // namespace

// ---------------------------------------------------------------- public

std::string to_string(ModelKind kind) {
  for (const auto& [value, text] : kModelNames) {
    if (value == kind) return text;
  }
  return "?";
}

std::string to_string(TaskKind kind) {
  for (const auto& [value, text] : kTaskNames) {
    if (value == kind) return text;
  }
  return "?";
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object() || doc.empty()) throw ConfigError("config must be a non-empty object");
  reject_unknown(doc, {"model", "task", "params", "jumps", "initial_state", "sim", "options"},
                 "config");
  ExperimentConfig c;
  c.task = parse_enum(kTaskNames, get_string(doc, "task", "config"), "task");
  if (c.task == TaskKind::ReproduceFigures) {
    reject_unknown(doc, {"task", "sim", "options"}, "a reproduce_figures config");
  } else {
    c.model = parse_enum(kModelNames, get_string(doc, "model", "config"), "model");
    c.params = parse_params(doc, *c.model);
  }
  if (doc.contains("initial_state")) c.initial_state = get_vector(doc.at("initial_state"), "initial_state");
  c.sim = parse_sim(doc);
  c.options = parse_options(doc, c.task);
  check_task_requirements(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  if (c.model) {
    j["model"] = to_string(*c.model);
    j["params"] = params_to_json(*c.params, is_deterministic(*c.model));
    if (!is_deterministic(*c.model) && !(jumps_of(*c.params) == JumpSpec())) {
      j["jumps"] = jumps_to_json(jumps_of(*c.params));
    }
  }
  if (!c.initial_state.empty()) j["initial_state"] = c.initial_state;
  j["sim"] = json{{"t_end", c.sim.t_end},
                  {"dt", c.sim.dt},
                  {"seed", c.sim.seed},
                  {"record_stride", c.sim.record_stride},
                  {"boundary_policy", to_string(c.sim.boundary_policy)}};
  json o = json::object();
  const TaskOptions& t = c.options;
  if (t.n_paths) o["n_paths"] = *t.n_paths;
  if (t.epsilon) o["epsilon"] = *t.epsilon;
  if (t.i_threshold) o["i_threshold"] = *t.i_threshold;
  if (t.x1) o["x1"] = *t.x1;
  if (t.x2) o["x2"] = *t.x2;
  if (t.grid_n) o["grid_n"] = *t.grid_n;
  if (t.x0) o["x0"] = *t.x0;
  if (t.dt_probe) o["dt_probe"] = *t.dt_probe;
  if (t.n_samples) o["n_samples"] = *t.n_samples;
  if (t.states) o["states"] = *t.states;
  if (!o.empty()) j["options"] = o;
  return j;
}

int run(const fs::path& config_path, const fs::path& out_dir, const RunOverrides& overrides,
        std::ostream& diag) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
    if (overrides.seed) cfg.sim.seed = *overrides.seed;
  } catch (const std::exception& e) {
    diag << error_line("config", e.what()).dump() << "\n";
    return kExitConfig;
  }

  if (cfg.task == TaskKind::ReproduceFigures) {
    ReproduceOptions opts;
    opts.seed = overrides.seed.value_or(cfg.sim.seed);
    opts.threads = overrides.threads;
    if (cfg.options.n_paths) opts.n_paths = *cfg.options.n_paths;
    return reproduce_figures(out_dir, opts, diag);
  }

  try {
    fs::create_directories(out_dir);
    json summary;
    switch (cfg.task) {
      case TaskKind::Simulate: summary = run_simulate(cfg, out_dir); break;
      case TaskKind::Ensemble: summary = run_ensemble_task(cfg, overrides.threads); break;
      case TaskKind::Stability: summary = run_stability(cfg); break;
      case TaskKind::ExitProb: summary = run_exit(cfg, out_dir, overrides.threads); break;
      case TaskKind::GeneratorCheck: summary = run_generator_check(cfg, overrides.threads); break;
      case TaskKind::ReproduceFigures: break;
    }
    summary["task"] = to_string(cfg.task);
    summary["model"] = to_string(*cfg.model);
    summary["seed"] = cfg.sim.seed;
    write_json(out_dir / "summary.json", summary);
  } catch (const ConfigError& e) {
    diag << error_line("config", e.what()).dump() << "\n";
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    json line = error_line("numerical", e.what());
    line["condition_estimate"] = e.condition_estimate();
    diag << line.dump() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    diag << error_line("io", e.what()).dump() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    diag << error_line("config", e.what()).dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    diag << error_line("internal", e.what()).dump() << "\n";
    return kExitUnexpected;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- writers

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool three = !traj.states.empty() && traj.states.front().size() == 3;
  os << (three ? "t,S,I,R,jumped\n" : "t,S,I,jumped\n");
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const SimplexState& x = traj.states[k];
    os << format_real("%.6f", traj.times[k]) << ',' << format_real("%.12g", x.S()) << ','
       << format_real("%.12g", x.I());
    if (three) os << ',' << format_real("%.12g", x.R());
    os << ',' << static_cast<int>(traj.jumped[k]) << '\n';
  }
}

void write_verdict_csv(std::ostream& os,
                       const std::vector<std::pair<std::string, ModelParams>>& panels) {
  os << "panel,beta,threshold,holds\n";
  for (const auto& [name, params] : panels) {
    const StabilityVerdict v = panel_verdict(params);
    const double beta = std::visit([](const auto& p) { return p.beta; }, params);
    os << name << ',' << format_real("%.12g", beta) << ','
       << format_real("%.12g", v.threshold_value) << ',' << (v.condition_holds ? "true" : "false")
       << '\n';
  }
}

json to_json(const SimplexState& x) { return x.coords(); }

json to_json(const StabilityVerdict& v) {
  json terms = json::array();
  for (const auto& [name, value] : v.terms) terms.push_back(json{{"term", name}, {"value", value}});
  json j{{"condition_holds", v.condition_holds},
         {"threshold", v.threshold_value},
         {"margin", v.margin},
         {"terms", terms}};
  if (!v.branches.empty()) {
    json b = json::object();
    for (const auto& [name, value] : v.branches) b[name] = value;
    j["branches"] = b;
  }
  j["witness_phi"] = v.witness_phi ? json(*v.witness_phi) : json(nullptr);
  return j;
}

json to_json(const EnsembleSummary& s) {
  auto real_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"n_paths", s.n_paths},
              {"extinct_count", s.extinct_count},
              {"extinction_fraction", s.extinction_fraction},
              {"extinction_ci", {s.extinction_ci_low, s.extinction_ci_high}},
              {"terminal_i_quantiles",
               {{"q05", s.terminal_i_q05}, {"q50", s.terminal_i_q50}, {"q95", s.terminal_i_q95}}},
              {"hit_count", s.hit_count},
              {"censored_count", s.censored_count},
              {"mean_hitting_time", real_or_null(s.mean_hitting_time)},
              {"hitting_time_se", s.hitting_time_se},
              {"steps", s.stats.moves},
              {"clamp_count", s.stats.interventions},
              {"max_sum_error", s.stats.max_sum_error}};
}

}  // namespace levy_epi
