#ifndef LEVY_EPIDEMIC_EXPERIMENT_HPP
#define LEVY_EPIDEMIC_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "levy_epidemic/analysis.hpp"
#include "levy_epidemic/integrator.hpp"
#include "levy_epidemic/models.hpp"
#include "levy_epidemic/stability.hpp"

namespace levy_epi {

enum class ModelKind { Sis, Sirs, SisDeterministic, SirsDeterministic };
enum class TaskKind { Simulate, Ensemble, Stability, ExitProb, GeneratorCheck, ReproduceFigures };

std::string to_string(ModelKind kind);
std::string to_string(TaskKind kind);

struct TaskOptions {
  std::optional<std::size_t> n_paths;
  std::optional<double> epsilon;
  std::optional<double> i_threshold;
  std::optional<double> x1;
  std::optional<double> x2;
  std::optional<std::size_t> grid_n;
  std::optional<double> x0;
  std::optional<double> dt_probe;
  std::optional<std::size_t> n_samples;
  std::optional<std::vector<std::vector<double>>> states;

  bool operator==(const TaskOptions&) const = default;
};

struct ExperimentConfig {
  std::optional<ModelKind> model;  // absent only for reproduce_figures
  TaskKind task = TaskKind::Simulate;
  std::optional<ModelParams> params;
  std::vector<double> initial_state;
  SimConfig sim;
  TaskOptions options;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a config document; throws ConfigError on any schema problem,
/// including unknown keys and keys that do not belong to the selected model or task.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
};

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Runs one configured task and writes its outputs into out_dir. Errors are reported as a
/// single JSON line on `diag` and mapped to the exit codes above.
int run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
        const RunOverrides& overrides, std::ostream& diag);

// ------------------------------------------------------------ figure panels

struct FigurePanel {
  std::string name;  // fig1a ... fig3b
  ModelParams params;
  SimplexState x0;
};

std::vector<FigurePanel> figure_panels();

/// Verdict used for a panel: the SIS criterion matching the jump sign, or the SIRS criterion.
StabilityVerdict panel_verdict(const ModelParams& params);

struct ReproduceOptions {
  std::uint64_t seed = 1789;
  std::size_t threads = 1;
  std::size_t n_paths = 100;
  double t_end = 500.0;
  double dt = 1e-3;
  std::size_t record_stride = 100;
};

inline constexpr double kExtinctionThreshold = 0.01;

/// Writes <panel>.csv for the six panels, verdicts.csv and summary.json.
int reproduce_figures(const std::filesystem::path& out_dir, const ReproduceOptions& opts,
                      std::ostream& diag);

// ------------------------------------------------------------------ writers

/// Columns: t,S,I[,R],jumped with t printed to 6 decimals.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Columns: panel,beta,threshold,holds.
void write_verdict_csv(std::ostream& os,
                       const std::vector<std::pair<std::string, ModelParams>>& panels);

nlohmann::json to_json(const StabilityVerdict& v);
nlohmann::json to_json(const EnsembleSummary& s);
nlohmann::json to_json(const SimplexState& x);

}  // namespace levy_epi

#endif  // LEVY_EPIDEMIC_EXPERIMENT_HPP
