#include "whsde/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace whsde {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

// Tracks consumed keys of one JSON object so unknown keys are fatal.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    consumed_.insert(key);
    if (!j_.contains(key)) fail(member(key), "missing required field");
    return j_.at(key);
  }

  const json* raw_optional(const char* key) {
    consumed_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  double number(const char* key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(member(key), "expected a number");
    return v.get<double>();
  }

  double number_or(const char* key, double def) {
    return has(key) ? number(key) : (consumed_.insert(key), def);
  }

  std::int64_t integer(const char* key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(member(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::int64_t integer_or(const char* key, std::int64_t def) {
    return has(key) ? integer(key) : (consumed_.insert(key), def);
  }

  std::uint64_t uinteger_or(const char* key, std::uint64_t def) {
    if (!has(key)) {
      consumed_.insert(key);
      return def;
    }
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() &&
                                     v.get<std::int64_t>() >= 0)) {
      fail(member(key), "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string_or(const char* key, const std::string& def) {
    if (!has(key)) {
      consumed_.insert(key);
      return def;
    }
    const json& v = raw(key);
    if (!v.is_string()) fail(member(key), "expected a string");
    return v.get<std::string>();
  }

  std::string member(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  Section child(const char* key) { return Section(raw(key), member(key)); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (consumed_.find(item.key()) == consumed_.end()) {
        fail(path_, "unknown key '" + item.key() + "'");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> consumed_;
};

void check(bool ok, const std::string& path, const char* what) {
  if (!ok) fail(path, what);
}

ModelParams parse_params(Section sec) {
  ModelParams par{};
  par.omega = sec.number("omega");
  par.beta = sec.number("beta");
  par.mu = sec.number("mu");
  par.mu1 = sec.number("mu1");
  par.alpha = sec.number("alpha");
  par.p = sec.number("p");
  par.q = sec.number("q");
  const struct {
    const char* name;
    double value;
  } fields[] = {{"omega", par.omega}, {"beta", par.beta}, {"mu", par.mu},
                {"mu1", par.mu1},     {"alpha", par.alpha}, {"p", par.p},
                {"q", par.q}};
  for (const auto& f : fields) {
    check(f.value > 0.0 && std::isfinite(f.value), sec.member(f.name),
          "must be strictly positive");
  }
  sec.finish();
  return par;
}

NoiseParams parse_noise(Section sec) {
  NoiseParams noise{};
  noise.sigma1 = sec.number("sigma1");
  noise.sigma2 = sec.number("sigma2");
  check(noise.sigma1 >= 0.0 && std::isfinite(noise.sigma1),
        sec.member("sigma1"), "must be non-negative");
  check(noise.sigma2 >= 0.0 && std::isfinite(noise.sigma2),
        sec.member("sigma2"), "must be non-negative");
  sec.finish();
  return noise;
}

TimeGrid parse_grid(Section sec) {
  const double t0 = sec.number_or("t0", 0.0);
  const double t_end = sec.number("t_end");
  const double dt = sec.number("dt");
  check(std::isfinite(t0), sec.member("t0"), "must be finite");
  check(dt > 0.0 && std::isfinite(dt), sec.member("dt"),
        "must be strictly positive");
  check(t_end > t0, sec.member("t_end"), "must exceed t0");
  sec.finish();
  return TimeGrid::from_duration(t0, t_end, dt);
}

SimState parse_initial(Section sec) {
  SimState x{};
  x.s = sec.number("s");
  x.i = sec.number("i");
  x.b = sec.number("b");
  check(x.s >= 0.0, sec.member("s"), "must be non-negative");
  check(x.i >= 0.0, sec.member("i"), "must be non-negative");
  check(x.b >= 0.0, sec.member("b"), "must be non-negative");
  sec.finish();
  return x;
}

RetentionPolicy parse_retention(const json& v, const std::string& path) {
  RetentionPolicy pol;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "all") {
      pol.mode = RetentionPolicy::Mode::All;
    } else if (s == "stats_only") {
      pol.mode = RetentionPolicy::Mode::StatsOnly;
    } else {
      fail(path, "expected \"all\", \"stats_only\" or {\"thinned\": k}");
    }
    return pol;
  }
  Section sec(v, path);
  pol.mode = RetentionPolicy::Mode::Thinned;
  pol.stride = sec.integer("thinned");
  check(pol.stride >= 1, sec.member("thinned"), "must be at least 1");
  sec.finish();
  return pol;
}

ControlConfig parse_control(Section sec) {
  ControlConfig cc;
  cc.weights.a1 = sec.number("a1");
  cc.weights.a2 = sec.number("a2");
  cc.weights.u11_max = sec.number_or("u11_max", 1.0);
  cc.weights.u12_max = sec.number_or("u12_max", 1.0);
  cc.weights.u2_max = sec.number_or("u2_max", 1.0);
  check(cc.weights.a1 > 0.0, sec.member("a1"), "must be strictly positive");
  check(cc.weights.a2 > 0.0, sec.member("a2"), "must be strictly positive");
  check(cc.weights.u11_max > 0.0, sec.member("u11_max"),
        "must be strictly positive");
  check(cc.weights.u12_max > 0.0, sec.member("u12_max"),
        "must be strictly positive");
  check(cc.weights.u2_max > 0.0, sec.member("u2_max"),
        "must be strictly positive");

  if (const json* n = sec.raw_optional("n")) {
    if (!n->is_array() || n->size() != 3) {
      fail(sec.member("n"), "expected an array of 3 numbers");
    }
    for (int i = 0; i < 3; ++i) {
      const json& v = (*n)[static_cast<std::size_t>(i)];
      if (!v.is_number()) fail(sec.member("n"), "expected numbers");
      cc.adjoint_n[static_cast<std::size_t>(i)] = v.get<double>();
    }
  }

  cc.sweep.theta = sec.number_or("theta", 0.5);
  cc.sweep.tolerance = sec.number_or("tolerance", 1e-3);
  cc.sweep.max_iterations =
      static_cast<int>(sec.integer_or("max_iterations", 100));
  cc.sweep.n_paths = sec.integer_or("n_paths", 200);
  check(cc.sweep.theta > 0.0 && cc.sweep.theta <= 1.0, sec.member("theta"),
        "must lie in (0, 1]");
  check(cc.sweep.tolerance > 0.0, sec.member("tolerance"),
        "must be strictly positive");
  check(cc.sweep.max_iterations >= 1, sec.member("max_iterations"),
        "must be at least 1");
  check(cc.sweep.n_paths >= 1, sec.member("n_paths"), "must be at least 1");

  if (const json* sc = sec.raw_optional("scenarios")) {
    if (!sc->is_array() || sc->empty()) {
      fail(sec.member("scenarios"), "expected a non-empty array");
    }
    cc.scenarios.clear();
    for (const json& v : *sc) {
      if (!v.is_string()) fail(sec.member("scenarios"), "expected strings");
      const auto parsed = scenario_from_name(v.get<std::string>());
      if (!parsed) {
        fail(sec.member("scenarios"),
             "unknown scenario '" + v.get<std::string>() + "'");
      }
      if (std::find(cc.scenarios.begin(), cc.scenarios.end(), *parsed) !=
          cc.scenarios.end()) {
        fail(sec.member("scenarios"), "duplicate scenario");
      }
      cc.scenarios.push_back(*parsed);
    }
  }
  sec.finish();
  return cc;
}

SweepSpec parse_sweep(Section sec) {
  SweepSpec spec;
  const json& axes = sec.raw("axes");
  if (!axes.is_array() || axes.empty() || axes.size() > 2) {
    fail(sec.member("axes"), "expected an array of 1 or 2 axes");
  }
  int idx = 0;
  for (const json& a : axes) {
    const std::string apath =
        sec.member("axes") + "[" + std::to_string(idx++) + "]";
    Section asec(a, apath);
    SweepAxis axis;
    axis.param = asec.string_or("param", "");
    static const std::set<std::string> kAxisParams = {
        "omega", "beta", "mu", "mu1", "alpha",
        "p",     "q",    "sigma1", "sigma2", "sigma"};
    check(kAxisParams.count(axis.param) == 1, asec.member("param"),
          "unknown sweep parameter");
    axis.min = asec.number("min");
    axis.max = asec.number("max");
    axis.count = static_cast<int>(asec.integer("count"));
    const std::string scale = asec.string_or("scale", "linear");
    if (scale == "log") {
      axis.log_scale = true;
    } else if (scale != "linear") {
      fail(asec.member("scale"), "expected \"linear\" or \"log\"");
    }
    check(axis.count >= 2, asec.member("count"), "must be at least 2");
    check(axis.max > axis.min, asec.member("max"), "must exceed min");
    if (axis.log_scale) {
      check(axis.min > 0.0, asec.member("min"),
            "must be strictly positive on a log axis");
    }
    asec.finish();
    spec.axes.push_back(std::move(axis));
  }

  const json& metrics = sec.raw("metrics");
  if (!metrics.is_array() || metrics.empty()) {
    fail(sec.member("metrics"), "expected a non-empty array");
  }
  for (const json& m : metrics) {
    if (!m.is_string()) fail(sec.member("metrics"), "expected strings");
    const auto name = m.get<std::string>();
    if (std::find(kSweepMetrics.begin(), kSweepMetrics.end(), name) ==
        kSweepMetrics.end()) {
      fail(sec.member("metrics"), "unknown metric '" + name + "'");
    }
    if (std::find(spec.metrics.begin(), spec.metrics.end(), name) !=
        spec.metrics.end()) {
      fail(sec.member("metrics"), "duplicate metric '" + name + "'");
    }
    spec.metrics.push_back(name);
  }
  sec.finish();
  return spec;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Section root(j, "");

  RunConfig cfg;
  cfg.params = parse_params(root.child("params"));
  cfg.noise = parse_noise(root.child("noise"));
  cfg.grid = parse_grid(root.child("grid"));
  cfg.initial = parse_initial(root.child("initial"));

  cfg.n_paths = root.integer_or("n_paths", 500);
  check(cfg.n_paths >= 1, "n_paths", "must be at least 1");
  cfg.base_seed = root.uinteger_or("base_seed", 12345);
  cfg.extinction_threshold = root.number_or("extinction_threshold", 0.01);
  check(cfg.extinction_threshold > 0.0, "extinction_threshold",
        "must be strictly positive");
  cfg.epsilon = root.number_or("epsilon", 0.05);
  check(cfg.epsilon > 0.0 && cfg.epsilon < 1.0, "epsilon",
        "must lie in (0, 1)");

  if (const json* v = root.raw_optional("retention")) {
    cfg.retention = parse_retention(*v, "retention");
  }
  cfg.output_dir = root.string_or("output_dir", "out");
  check(!cfg.output_dir.empty(), "output_dir", "must be non-empty");
  cfg.time_unit = root.string_or("time_unit", "day");

  if (const json* v = root.raw_optional("feasible_n")) {
    if (!v->is_number()) fail("feasible_n", "expected a number");
    cfg.feasible_n = v->get<double>();
    check(*cfg.feasible_n > 0.0, "feasible_n", "must be strictly positive");
  }
  if (const json* v = root.raw_optional("feasible_b_max")) {
    if (!v->is_number()) fail("feasible_b_max", "expected a number");
    cfg.feasible_b_max = v->get<double>();
    check(*cfg.feasible_b_max > 0.0, "feasible_b_max",
          "must be strictly positive");
  }

  if (root.raw_optional("control") != nullptr) {
    cfg.control = parse_control(root.child("control"));
  }
  if (root.raw_optional("sweep") != nullptr) {
    cfg.sweep = parse_sweep(root.child("sweep"));
  }
  root.finish();
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  j["params"] = {{"omega", cfg.params.omega}, {"beta", cfg.params.beta},
                 {"mu", cfg.params.mu},       {"mu1", cfg.params.mu1},
                 {"alpha", cfg.params.alpha}, {"p", cfg.params.p},
                 {"q", cfg.params.q}};
  j["noise"] = {{"sigma1", cfg.noise.sigma1}, {"sigma2", cfg.noise.sigma2}};
  j["grid"] = {{"t0", cfg.grid.t0},
               {"t_end", cfg.grid.t_end()},
               {"dt", cfg.grid.dt}};
  j["initial"] = {{"s", cfg.initial.s},
                  {"i", cfg.initial.i},
                  {"b", cfg.initial.b}};
  j["n_paths"] = cfg.n_paths;
  j["base_seed"] = cfg.base_seed;
  j["extinction_threshold"] = cfg.extinction_threshold;
  j["epsilon"] = cfg.epsilon;
  switch (cfg.retention.mode) {
    case RetentionPolicy::Mode::All: j["retention"] = "all"; break;
    case RetentionPolicy::Mode::StatsOnly:
      j["retention"] = "stats_only";
      break;
    case RetentionPolicy::Mode::Thinned:
      j["retention"] = {{"thinned", cfg.retention.stride}};
      break;
  }
  j["output_dir"] = cfg.output_dir;
  j["time_unit"] = cfg.time_unit;
  if (cfg.feasible_n) j["feasible_n"] = *cfg.feasible_n;
  if (cfg.feasible_b_max) j["feasible_b_max"] = *cfg.feasible_b_max;
  if (cfg.control) {
    const ControlConfig& cc = *cfg.control;
    json sc = json::array();
    for (Scenario s : cc.scenarios) sc.push_back(std::string(scenario_name(s)));
    j["control"] = {{"a1", cc.weights.a1},
                    {"a2", cc.weights.a2},
                    {"u11_max", cc.weights.u11_max},
                    {"u12_max", cc.weights.u12_max},
                    {"u2_max", cc.weights.u2_max},
                    {"n", cc.adjoint_n},
                    {"theta", cc.sweep.theta},
                    {"tolerance", cc.sweep.tolerance},
                    {"max_iterations", cc.sweep.max_iterations},
                    {"n_paths", cc.sweep.n_paths},
                    {"scenarios", sc}};
  }
  if (cfg.sweep) {
    json axes = json::array();
    for (const SweepAxis& a : cfg.sweep->axes) {
      axes.push_back({{"param", a.param},
                      {"min", a.min},
                      {"max", a.max},
                      {"count", a.count},
                      {"scale", a.log_scale ? "log" : "linear"}});
    }
    j["sweep"] = {{"axes", axes}, {"metrics", cfg.sweep->metrics}};
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> config_warnings(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  if (cfg.control && cfg.control->weights.u2_max > cfg.params.alpha) {
    std::ostringstream os;
    os << "control.u2_max (" << cfg.control->weights.u2_max
       << ") exceeds the burst rate alpha (" << cfg.params.alpha
       << "); the controlled virion production term can turn negative";
    warnings.push_back(os.str());
  }
  return warnings;
}

EnsembleOptions ensemble_options(const RunConfig& cfg) {
  EnsembleOptions opts;
  opts.n_paths = cfg.n_paths;
  opts.base_seed = cfg.base_seed;
  opts.extinction_threshold = cfg.extinction_threshold;
  opts.retention = cfg.retention;
  opts.feasible_n = cfg.feasible_n;
  opts.feasible_b_max = cfg.feasible_b_max;
  return opts;
}

namespace {

RunConfig make_base_preset() {
  RunConfig cfg;
  cfg.params = {10.0, 0.005, 0.1, 0.6, 0.24, 0.795, 0.28};
  cfg.noise = {0.1, 0.1};
  cfg.grid = TimeGrid::from_duration(0.0, 100.0, 0.01);
  cfg.initial = {100.0, 100.0, 100.0};
  cfg.n_paths = 500;
  cfg.base_seed = 12345;
  return cfg;
}

// Shared setup of the dosing experiments: persistent regime (beta raised to
// 0.05), weak noise, 30-day horizon.  u2 is capped at the burst rate alpha so
// the production term (alpha - u2) stays non-negative; theta = 0.3 keeps the
// relaxed update stable once u2 saturates.
RunConfig make_control_preset(SimState initial, double a1, double a2) {
  RunConfig cfg = make_base_preset();
  cfg.params.beta = 0.05;
  cfg.noise = {0.05, 0.05};
  cfg.grid = TimeGrid::from_duration(0.0, 30.0, 0.01);
  cfg.initial = initial;
  cfg.n_paths = 200;
  ControlConfig cc;
  cc.weights = {a1, a2, 1.0, 1.0, 0.24};
  cc.adjoint_n = {0.01, 0.02, 0.03};
  cc.sweep.theta = 0.3;
  cc.sweep.tolerance = 1e-3;
  cc.sweep.max_iterations = 100;
  cc.sweep.n_paths = 200;
  cfg.control = cc;
  return cfg;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "example1", "example2",  "example3", "example4i", "example4ii",
      "example4iii", "fig66a", "fig66b",   "figlkm_a",  "figlkm_b"};
  return names;
}

RunConfig preset_config(const std::string& name) {
  if (name == "example1") {
    return make_base_preset();
  }
  if (name == "example2") {
    RunConfig cfg = make_base_preset();
    cfg.params.beta = 0.05;
    cfg.params.mu1 = 0.1;
    return cfg;
  }
  if (name == "example3") {
    RunConfig cfg = preset_config("example2");
    cfg.noise = {0.5, 0.8};
    return cfg;
  }
  if (name == "example4i") {
    RunConfig cfg = make_base_preset();
    cfg.params.p = 0.25;
    cfg.params.q = 0.1;
    cfg.initial = {200.0, 40.0, 100.0};
    return cfg;
  }
  if (name == "example4ii") {
    RunConfig cfg = make_base_preset();
    cfg.params.p = 0.45;
    cfg.params.q = 0.25;
    cfg.initial = {200.0, 300.0, 300.0};
    return cfg;
  }
  if (name == "example4iii") {
    RunConfig cfg = make_base_preset();
    cfg.params.p = 0.8;
    cfg.params.q = 0.4;
    cfg.initial = {200.0, 600.0, 600.0};
    return cfg;
  }
  if (name == "fig66a") {
    return make_control_preset({300.0, 80.0, 50.0}, 10.0, 5.0);
  }
  if (name == "fig66b") {
    return make_control_preset({200.0, 100.0, 30.0}, 10.0, 5.0);
  }
  if (name == "figlkm_a") {
    return make_control_preset({200.0, 100.0, 30.0}, 3.0, 3.0);
  }
  if (name == "figlkm_b") {
    return make_control_preset({200.0, 100.0, 30.0}, 1.0, 0.8);
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::string preset_document(const std::string& name) {
  return serialize_config(preset_config(name));
}

}  // namespace whsde
