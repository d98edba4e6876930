#include "whsde/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace whsde {

namespace {

using nlohmann::json;

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json state_json(const SimState& x) {
  return {{"s", x.s}, {"i", x.i}, {"b", x.b}};
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trajectory_csv(const Trajectory& trajectory,
                           const std::vector<Controls>* controls) {
  std::string out;
  out.reserve(trajectory.states.size() * 80);
  out += controls ? "t,S,I,B,u11,u12,u2\n" : "t,S,I,B\n";
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const SimState& x = trajectory.states[k];
    out += format_g17(trajectory.grid.time_at(static_cast<std::int64_t>(k)));
    out += ',';
    out += format_g17(x.s);
    out += ',';
    out += format_g17(x.i);
    out += ',';
    out += format_g17(x.b);
    if (controls) {
      const Controls& u = (*controls)[k];
      out += ',';
      out += format_g17(u.u11);
      out += ',';
      out += format_g17(u.u12);
      out += ',';
      out += format_g17(u.u2);
    }
    out += '\n';
  }
  return out;
}

std::string scenario_csv(const TimeGrid& grid,
                         const std::vector<ScenarioOutcome>& outcomes) {
  std::string out = "t";
  for (const auto& oc : outcomes) {
    out += ",I_";
    out += scenario_name(oc.scenario);
  }
  for (const auto& oc : outcomes) {
    out += ",B_";
    out += scenario_name(oc.scenario);
  }
  out += '\n';
  for (std::int64_t k = 0; k <= grid.n_steps; ++k) {
    out += format_g17(grid.time_at(k));
    for (const auto& oc : outcomes) {
      out += ',';
      out += format_g17(oc.mean_i[static_cast<std::size_t>(k)]);
    }
    for (const auto& oc : outcomes) {
      out += ',';
      out += format_g17(oc.mean_b[static_cast<std::size_t>(k)]);
    }
    out += '\n';
  }
  return out;
}

json analysis_json(const DeterministicSummary& summary,
                   const StabilityReport& report) {
  json j;
  j["r0"] = summary.r0;
  j["e0"] = state_json(summary.e0);
  j["e1"] = summary.e1 ? state_json(*summary.e1) : json(nullptr);
  j["condition_a"] = {{"lhs", report.condition_a.lhs},
                      {"rhs", report.condition_a.rhs},
                      {"holds", report.condition_a.holds}};
  j["condition_b"] = {{"lhs", report.condition_b.lhs},
                      {"rhs", report.condition_b.rhs},
                      {"holds", report.condition_b.holds}};
  j["matrix"] = {{"d1", report.matrix.d1},
                 {"d2", report.matrix.d2},
                 {"b", report.matrix.b}};
  j["eigenvalues"] = report.eigenvalues;
  j["negative_definite"] = report.negative_definite;
  j["decay_rate_bound"] = report.decay_rate_bound
                              ? json(*report.decay_rate_bound)
                              : json(nullptr);
  j["boundedness_limit"] = report.boundedness_limit;
  j["chebyshev_k"] = report.chebyshev_k;
  j["permanence_h"] = report.permanence_h;
  j["epsilon"] = report.epsilon;
  j["printed_conditions_disagree"] = report.printed_conditions_disagree;
  return j;
}

json ensemble_stats_json(const EnsembleStats& stats) {
  json j;
  j["grid"] = {{"t0", stats.grid.t0},
               {"t_end", stats.grid.t_end()},
               {"dt", stats.grid.dt},
               {"n_steps", stats.grid.n_steps}};
  j["n_paths"] = stats.n_paths;
  j["seeds"] = {{"base_seed", stats.base_seed},
                {"path_seed_derivation", "splitmix64(base_seed, path_index)"}};

  json checkpoints = json::array();
  for (std::size_t c = 0; c < stats.checkpoints.size(); ++c) {
    const auto idx = static_cast<std::size_t>(stats.checkpoints[c]);
    json cp;
    cp["t"] = stats.grid.time_at(stats.checkpoints[c]);
    cp["mean"] = stats.mean[idx];
    cp["variance"] = stats.variance[idx];
    json q;
    q["s"] = stats.quantiles[c][0];
    q["i"] = stats.quantiles[c][1];
    q["b"] = stats.quantiles[c][2];
    cp["quantiles"] = q;
    checkpoints.push_back(std::move(cp));
  }
  j["quantile_probs"] = stats.quantile_probs;
  j["checkpoints"] = std::move(checkpoints);

  j["extinction"] = {{"threshold", stats.extinction_threshold},
                     {"probability", stats.extinction_probability},
                     {"extinct_paths", stats.extinct_paths}};
  j["lyapunov"] = {
      {"mean", finite_or_null(stats.lyapunov_mean)},
      {"max", finite_or_null(stats.lyapunov_max)},
      {"valid_paths", stats.lyapunov_valid_paths},
      {"extinct_below_resolution", stats.lyapunov_extinct_paths}};
  j["s_histogram"] = {{"lo", stats.s_histogram.lo},
                      {"hi", stats.s_histogram.hi},
                      {"counts", stats.s_histogram.counts},
                      {"sample_mean", stats.s_histogram.sample_mean},
                      {"sample_stddev", stats.s_histogram.sample_stddev},
                      {"n_samples", stats.s_histogram.n_samples},
                      {"tail_fraction", stats.tail_fraction}};
  j["time_avg_tail"] = {{"s", stats.time_avg_tail[0]},
                        {"i", stats.time_avg_tail[1]},
                        {"b", stats.time_avg_tail[2]},
                        {"tail_fraction", stats.time_avg_tail_fraction}};
  j["terminal_mean"] = stats.mean.empty() ? json(nullptr)
                                          : json(stats.mean.back());
  j["clamping"] = {{"events_total", stats.clamp_events_total},
                   {"max_path_fraction", stats.max_clamp_fraction},
                   {"resolution_warning", stats.resolution_warning}};
  j["feasible_violation_paths"] = stats.feasible_violation_paths;
  j["retained_paths"] = stats.retained_path_indices;
  return j;
}

json sweep_result_json(const SweepResult& result) {
  json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["convergence_history"] = result.convergence_history;
  j["cost"] = result.cost;
  j["cost_se"] = result.cost_se;
  json u11 = json::array(), u12 = json::array(), u2 = json::array(),
       t = json::array();
  for (std::size_t k = 0; k < result.control.values.size(); ++k) {
    t.push_back(result.control.grid.time_at(static_cast<std::int64_t>(k)));
    u11.push_back(result.control.values[k].u11);
    u12.push_back(result.control.values[k].u12);
    u2.push_back(result.control.values[k].u2);
  }
  j["control"] = {{"t", std::move(t)},
                  {"u11", std::move(u11)},
                  {"u12", std::move(u12)},
                  {"u2", std::move(u2)}};
  return j;
}

json scenario_outcomes_json(const std::vector<ScenarioOutcome>& outcomes) {
  json j = json::array();
  for (const auto& oc : outcomes) {
    json e;
    e["scenario"] = std::string(scenario_name(oc.scenario));
    e["cost"] = oc.cost;
    e["cost_se"] = oc.cost_se;
    if (oc.sweep) {
      e["sweep"] = sweep_result_json(*oc.sweep);
    }
    j.push_back(std::move(e));
  }
  return j;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw IoError("cannot create directory '" + path + "': " + ec.message());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

}  // namespace whsde
