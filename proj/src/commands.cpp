#include "whsde/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "whsde/io.hpp"
#include "whsde/stability.hpp"

namespace whsde {

namespace {

using nlohmann::json;

void emit_warnings(const RunConfig& cfg, std::ostream& err) {
  for (const std::string& w : config_warnings(cfg)) {
    err << "warning: " << w << "\n";
  }
}

std::string joined(const std::string& dir, const std::string& name) {
  return dir + "/" + name;
}

void apply_axis(RunConfig& cfg, const std::string& param, double value) {
  if (param == "omega") cfg.params.omega = value;
  else if (param == "beta") cfg.params.beta = value;
  else if (param == "mu") cfg.params.mu = value;
  else if (param == "mu1") cfg.params.mu1 = value;
  else if (param == "alpha") cfg.params.alpha = value;
  else if (param == "p") cfg.params.p = value;
  else if (param == "q") cfg.params.q = value;
  else if (param == "sigma1") cfg.noise.sigma1 = value;
  else if (param == "sigma2") cfg.noise.sigma2 = value;
  else if (param == "sigma") cfg.noise = {value, value};
  else throw ConfigError("unknown sweep parameter '" + param + "'");
}

std::vector<double> axis_values(const SweepAxis& axis) {
  std::vector<double> values(static_cast<std::size_t>(axis.count));
  for (int i = 0; i < axis.count; ++i) {
    const double w = static_cast<double>(i) /
                     static_cast<double>(axis.count - 1);
    values[static_cast<std::size_t>(i)] =
        axis.log_scale
            ? std::exp(std::log(axis.min) +
                       w * (std::log(axis.max) - std::log(axis.min)))
            : axis.min + w * (axis.max - axis.min);
  }
  return values;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  emit_warnings(cfg, err);
  const DeterministicSummary summary = equilibria(cfg.params);
  const StabilityReport report =
      stability_report(cfg.params, cfg.noise, cfg.epsilon);
  const json j = analysis_json(summary, report);
  ensure_directory(cfg.output_dir);
  write_text_file(joined(cfg.output_dir, "analysis.json"), j.dump(2) + "\n");
  out << j.dump(2) << "\n";
  if (report.printed_conditions_disagree) {
    err << "warning: conditions A and B disagree with the eigenvalue test "
           "(b^2 vs d1*d2: "
        << report.matrix.b * report.matrix.b << " vs "
        << report.matrix.d1 * report.matrix.d2 << ")\n";
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  emit_warnings(cfg, err);
  const EnsembleStats stats = run_ensemble(cfg.initial, cfg.grid, cfg.params,
                                           cfg.noise, ensemble_options(cfg));
  ensure_directory(cfg.output_dir);
  write_text_file(joined(cfg.output_dir, "ensemble_stats.json"),
                  ensemble_stats_json(stats).dump(2) + "\n");
  for (std::size_t k = 0; k < stats.retained.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof(name), "trajectory_%05lld.csv",
                  static_cast<long long>(stats.retained_path_indices[k]));
    write_text_file(joined(cfg.output_dir, name),
                    trajectory_csv(stats.retained[k]));
  }
  if (stats.resolution_warning) {
    err << "warning: clamp rate exceeded 1% of steps on some path "
           "(max fraction "
        << stats.max_clamp_fraction << "); consider a smaller dt\n";
  }
  if (stats.feasible_violation_paths > 0) {
    err << "warning: " << stats.feasible_violation_paths
        << " paths left the configured feasible region\n";
  }
  const Vec3 terminal = stats.mean.back();
  out << "extinction_probability=" << stats.extinction_probability
      << " terminal_mean=(" << terminal[0] << ", " << terminal[1] << ", "
      << terminal[2] << ")"
      << " time_avg_tail_b=" << stats.time_avg_tail[2]
      << " clamp_events=" << stats.clamp_events_total << "\n";
  return kExitOk;
}

int cmd_control(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.control) {
    throw ConfigError("control: section required by the control command");
  }
  emit_warnings(cfg, err);
  const ControlConfig& cc = *cfg.control;
  const std::vector<ScenarioOutcome> outcomes =
      scenario_compare(cfg.initial, cfg.grid, cfg.params, cfg.noise,
                       cc.weights, cc.adjoint_n, cc.sweep, cc.scenarios,
                       cfg.base_seed);
  ensure_directory(cfg.output_dir);
  write_text_file(joined(cfg.output_dir, "scenario_comparison.csv"),
                  scenario_csv(cfg.grid, outcomes));
  write_text_file(
      joined(cfg.output_dir, "control_solution.json"),
      json{{"scenarios", scenario_outcomes_json(outcomes)}}.dump(2) + "\n");

  bool all_converged = true;
  for (const ScenarioOutcome& oc : outcomes) {
    out << scenario_name(oc.scenario) << ": J=" << oc.cost << " +- "
        << oc.cost_se;
    if (oc.sweep) {
      out << " iterations=" << oc.sweep->iterations
          << (oc.sweep->converged ? "" : " (not converged)");
    }
    out << "\n";
    if (!oc.sweep) continue;
    Trajectory mean_tr;
    mean_tr.grid = cfg.grid;
    mean_tr.states = oc.sweep->state_mean;
    const std::string name =
        std::string(scenario_name(oc.scenario)) + "_mean_trajectory.csv";
    write_text_file(joined(cfg.output_dir, name),
                    trajectory_csv(mean_tr, &oc.sweep->control.values));
    if (!oc.sweep->converged) {
      all_converged = false;
      err << "warning: sweep for scenario " << scenario_name(oc.scenario)
          << " did not converge within " << cc.sweep.max_iterations
          << " iterations (last change "
          << oc.sweep->convergence_history.back() << ")\n";
    }
  }
  return all_converged ? kExitOk : kExitNoConverge;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) {
    throw ConfigError("sweep: section required by the sweep command");
  }
  emit_warnings(cfg, err);
  const SweepSpec& spec = *cfg.sweep;
  const bool needs_ensemble =
      std::any_of(spec.metrics.begin(), spec.metrics.end(),
                  [](const std::string& m) {
                    return m == "extinction_probability" ||
                           m == "lyapunov_max" || m == "terminal_mean_B";
                  });

  std::vector<std::vector<double>> grids;
  for (const SweepAxis& axis : spec.axes) grids.push_back(axis_values(axis));

  std::string csv;
  for (const SweepAxis& axis : spec.axes) csv += axis.param + ",";
  for (std::size_t i = 0; i < spec.metrics.size(); ++i) {
    csv += spec.metrics[i];
    csv += (i + 1 < spec.metrics.size()) ? ',' : '\n';
  }

  const std::size_t n_cells =
      grids.size() == 2 ? grids[0].size() * grids[1].size() : grids[0].size();
  std::vector<double> axis0_of_cell;
  std::vector<double> extinction_of_cell;

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t i0 = grids.size() == 2 ? cell / grids[1].size() : cell;
    const std::size_t i1 = grids.size() == 2 ? cell % grids[1].size() : 0;
    RunConfig cell_cfg = cfg;
    apply_axis(cell_cfg, spec.axes[0].param, grids[0][i0]);
    csv += format_g17(grids[0][i0]);
    csv += ',';
    if (grids.size() == 2) {
      apply_axis(cell_cfg, spec.axes[1].param, grids[1][i1]);
      csv += format_g17(grids[1][i1]);
      csv += ',';
    }

    const StabilityReport report =
        stability_report(cell_cfg.params, cell_cfg.noise, cell_cfg.epsilon);
    std::optional<EnsembleStats> stats;
    if (needs_ensemble) {
      EnsembleOptions opts = ensemble_options(cell_cfg);
      opts.retention.mode = RetentionPolicy::Mode::StatsOnly;
      stats = run_ensemble(cell_cfg.initial, cell_cfg.grid, cell_cfg.params,
                           cell_cfg.noise, opts);
    }

    for (std::size_t i = 0; i < spec.metrics.size(); ++i) {
      const std::string& m = spec.metrics[i];
      std::string value;
      if (m == "condition_a") {
        value = report.condition_a.holds ? "1" : "0";
      } else if (m == "condition_b") {
        value = report.condition_b.holds ? "1" : "0";
      } else if (m == "negative_definite") {
        value = report.negative_definite ? "1" : "0";
      } else if (m == "extinction_probability") {
        value = format_g17(stats->extinction_probability);
      } else if (m == "lyapunov_max") {
        value = format_g17(stats->lyapunov_max);
      } else if (m == "terminal_mean_B") {
        value = format_g17(stats->mean.back()[2]);
      }
      csv += value;
      csv += (i + 1 < spec.metrics.size()) ? ',' : '\n';
    }
    if (grids.size() == 1 && stats) {
      axis0_of_cell.push_back(grids[0][i0]);
      extinction_of_cell.push_back(stats->extinction_probability);
    }
  }

  ensure_directory(cfg.output_dir);
  write_text_file(joined(cfg.output_dir, "sweep.csv"), csv);
  out << "sweep: " << n_cells << " cells -> "
      << joined(cfg.output_dir, "sweep.csv") << "\n";

  // Report where the extinction probability crosses one half along a 1-d axis.
  for (std::size_t i = 0; i + 1 < extinction_of_cell.size(); ++i) {
    const bool below = extinction_of_cell[i] < 0.5;
    const bool above_next = extinction_of_cell[i + 1] >= 0.5;
    if (below && above_next) {
      out << "extinction transition bracket: " << spec.axes[0].param
          << " in [" << axis0_of_cell[i] << ", " << axis0_of_cell[i + 1]
          << "]\n";
      break;
    }
  }
  return kExitOk;
}

}  // namespace whsde
