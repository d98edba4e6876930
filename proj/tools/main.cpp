#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "whsde/commands.hpp"
#include "whsde/config.hpp"
#include "whsde/io.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> paths;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON configuration file");
  cmd->add_option("--preset", opts.preset,
                  "built-in preset name (see --list-presets)");
  cmd->add_option("--seed", opts.seed, "override base_seed");
  cmd->add_option("--paths", opts.paths, "override n_paths");
  cmd->add_option("--dt", opts.dt, "override grid.dt");
  cmd->add_option("--t-end", opts.t_end, "override grid.t_end");
  cmd->add_option("--out", opts.out_dir, "override output_dir");
}

whsde::RunConfig load_config(const CommonOptions& opts) {
  if (opts.config_path.empty() == opts.preset.empty()) {
    throw whsde::ConfigError("exactly one of --config or --preset is required");
  }
  whsde::RunConfig cfg;
  if (!opts.preset.empty()) {
    cfg = whsde::preset_config(opts.preset);
  } else {
    std::ifstream in(opts.config_path);
    if (!in) {
      throw whsde::ConfigError("cannot open config file '" + opts.config_path +
                               "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    cfg = whsde::parse_config(buf.str());
  }
  if (opts.seed) cfg.base_seed = *opts.seed;
  if (opts.paths) {
    if (*opts.paths < 1) throw whsde::ConfigError("--paths must be positive");
    cfg.n_paths = *opts.paths;
    if (cfg.control) cfg.control->sweep.n_paths = *opts.paths;
  }
  if (opts.dt || opts.t_end) {
    const double dt = opts.dt.value_or(cfg.grid.dt);
    const double t_end = opts.t_end.value_or(cfg.grid.t_end());
    try {
      cfg.grid = whsde::TimeGrid::from_duration(cfg.grid.t0, t_end, dt);
    } catch (const std::invalid_argument& e) {
      throw whsde::ConfigError(e.what());
    }
  }
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "whsde: stochastic within-host viral dynamics laboratory "
      "(analysis, simulation, optimal dosing)"};
  app.require_subcommand(0, 1);

  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "print preset names and exit");

  CommonOptions analyze_opts, simulate_opts, control_opts, sweep_opts;
  CLI::App* analyze =
      app.add_subcommand("analyze", "closed-form stability criteria");
  add_common(analyze, analyze_opts);
  CLI::App* simulate =
      app.add_subcommand("simulate", "Euler-Maruyama ensemble run");
  add_common(simulate, simulate_opts);
  CLI::App* control = app.add_subcommand(
      "control", "forward-backward sweep and dosing scenario comparison");
  add_common(control, control_opts);
  CLI::App* sweep =
      app.add_subcommand("sweep", "metrics over a parameter grid");
  add_common(sweep, sweep_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return whsde::kExitConfig;
  }

  if (list_presets) {
    for (const std::string& name : whsde::preset_names()) {
      std::cout << name << "\n";
    }
    return whsde::kExitOk;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return whsde::kExitConfig;
  }

  try {
    if (analyze->parsed()) {
      return whsde::cmd_analyze(load_config(analyze_opts), std::cout,
                                std::cerr);
    }
    if (simulate->parsed()) {
      return whsde::cmd_simulate(load_config(simulate_opts), std::cout,
                                 std::cerr);
    }
    if (control->parsed()) {
      return whsde::cmd_control(load_config(control_opts), std::cout,
                                std::cerr);
    }
    if (sweep->parsed()) {
      return whsde::cmd_sweep(load_config(sweep_opts), std::cout, std::cerr);
    }
  } catch (const whsde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return whsde::kExitConfig;
  } catch (const whsde::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return whsde::kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return whsde::kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return whsde::kExitConfig;
  }
  return whsde::kExitOk;
}
