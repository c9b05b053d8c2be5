#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "levy_epidemic/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Jump-diffusion SIS/SIRS epidemic simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t paths = 0;

  CLI::App* run_cmd = app.add_subcommand("run", "Run the task described by a JSON config");
  run_cmd->add_option("--config", config_path, "Config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* run_seed = run_cmd->add_option("--seed", seed, "Override sim.seed");
  run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  CLI::App* fig_cmd = app.add_subcommand("reproduce-figures", "Regenerate the six figure panels");
  fig_cmd->add_option("--out", out_dir, "Output directory")->required();
  CLI::Option* fig_seed = fig_cmd->add_option("--seed", seed, "Master seed");
  fig_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI::Option* fig_paths =
      fig_cmd->add_option("--paths", paths, "Ensemble paths per panel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return levy_epi::kExitConfig;
  }

  if (run_cmd->parsed()) {
    levy_epi::RunOverrides overrides;
    if (*run_seed) overrides.seed = seed;
    overrides.threads = threads;
    return levy_epi::run(config_path, out_dir, overrides, std::cerr);
  }

  levy_epi::ReproduceOptions opts;
  if (*fig_seed) opts.seed = seed;
  if (*fig_paths) opts.n_paths = paths;
  opts.threads = threads;
  return levy_epi::reproduce_figures(out_dir, opts, std::cerr);
}
