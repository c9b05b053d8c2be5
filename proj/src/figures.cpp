#include <fstream>
#include <sstream>

#include "levy_epidemic/errors.hpp"
#include "levy_epidemic/experiment.hpp"

namespace levy_epi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SisParams sis(double beta, double sigma, double lambda, double mu, double mass, double h) {
  return SisParams{beta, mu, lambda, sigma, JumpSpec::constant(mass, h, h >= 0.0)};
}

SirsParams sirs(double beta, double sigma, double lambda, double delta, double mass, double j) {
  return SirsParams{beta, lambda, delta, sigma, JumpSpec::constant(mass, j, true)};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw fs::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
  }
}

}  // namespace

std::vector<FigurePanel> figure_panels() {
  const SimplexState sis0(0.6, 0.4);
  const SimplexState sirs0(0.3, 0.6, 0.1);
  return {
      {"fig1a", sis(0.1, 0.3, 0.3, 0.2, 1.0, -0.01), sis0},
      {"fig1b", sis(0.4, 0.3, 0.3, 0.1, 0.5, 0.1), sis0},
      {"fig2a", sis(0.4, 0.3, 0.3, 0.15, 1.0, -0.1), sis0},
      {"fig2b", sis(0.8, 0.3, 0.2, 0.1, 2.0, 0.1), sis0},
      {"fig3a", sirs(0.3, 0.1, 0.29, 0.4, 1.0, 0.3), sirs0},
      {"fig3b", sirs(0.8, 0.2, 0.1, 0.1, 0.5, 0.1), sirs0},
  };
}

StabilityVerdict panel_verdict(const ModelParams& params) {
  if (const auto* p = std::get_if<SisParams>(&params)) return sis_dfe_verdict(*p);
  return sirs_dfe_condition(std::get<SirsParams>(params));
}

int reproduce_figures(const fs::path& out_dir, const ReproduceOptions& opts, std::ostream& diag) {
  try {
    fs::create_directories(out_dir);
    const auto panels = figure_panels();

    SimConfig base;
    base.t_end = opts.t_end;
    base.dt = opts.dt;
    base.record_stride = opts.record_stride;
    base.validate();

    json summary;
    summary["seed"] = opts.seed;
    summary["n_paths"] = opts.n_paths;
    summary["t_end"] = opts.t_end;
    summary["dt"] = opts.dt;
    summary["extinction_threshold"] = kExtinctionThreshold;
    json panel_list = json::array();
    std::vector<std::pair<std::string, ModelParams>> verdict_rows;

    for (std::size_t k = 0; k < panels.size(); ++k) {
      const FigurePanel& panel = panels[k];
      SimConfig cfg = base;
      cfg.seed = opts.seed + k;

      // Path 0 of the panel ensemble is the plotted trajectory.
      RngStream stream(cfg.seed, 0);
      const Trajectory traj = simulate_path(panel.params, panel.x0, cfg, stream);
      std::ostringstream csv;
      write_trajectory_csv(csv, traj);
      write_file(out_dir / (panel.name + ".csv"), csv.str());

      EnsembleOptions eo;
      eo.n_paths = opts.n_paths;
      eo.i_threshold = kExtinctionThreshold;
      eo.threads = opts.threads;
      const EnsembleSummary ens = run_ensemble(panel.params, panel.x0, cfg, eo);

      panel_list.push_back(json{{"panel", panel.name},
                                {"model", std::holds_alternative<SisParams>(panel.params) ? "sis" : "sirs"},
                                {"seed", cfg.seed},
                                {"initial_state", to_json(panel.x0)},
                                {"verdict", to_json(panel_verdict(panel.params))},
                                {"trajectory_terminal", to_json(traj.terminal())},
                                {"ensemble", to_json(ens)}});
      verdict_rows.emplace_back(panel.name, panel.params);
    }
    summary["panels"] = panel_list;

    std::ostringstream verdicts;
    write_verdict_csv(verdicts, verdict_rows);
    write_file(out_dir / "verdicts.csv", verdicts.str());
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  } catch (const fs::filesystem_error& e) {
    diag << json{{"error", "io"}, {"message", e.what()}}.dump() << "\n";
    return kExitIo;
  } catch (const NumericalFailure& e) {
    diag << json{{"error", "numerical"}, {"message", e.what()}}.dump() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    diag << json{{"error", "config"}, {"message", e.what()}}.dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    diag << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kExitUnexpected;
  }
  return kExitOk;
}

}  // namespace levy_epi
