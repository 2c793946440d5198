#pragma once

// Declarative scenarios: a YAML config (schema_version 1) selects a study,
// the physical and numerical parameters, an optional sweep axis and a list
// of cases. Running it writes CSV tables, results.json and manifest.json.

#include "fwmbs/io.hpp"
#include "fwmbs/studies.hpp"

#include <yaml-cpp/yaml.h>

#include <atomic>
#include <cstdlib>
#include <exception>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace fwmbs {

inline constexpr int kSchemaVersion = 1;

enum class RunMode { CW, Pulsed };
enum class Study { Flux, G2Map, G2Click, Green, Schmidt, Inputs, Single };

inline const std::map<std::string, Study>& study_names() {
  static const std::map<std::string, Study> m = {{"flux", Study::Flux},       {"g2_map", Study::G2Map},
                                                 {"g2_click", Study::G2Click}, {"green", Study::Green},
                                                 {"schmidt", Study::Schmidt},  {"inputs", Study::Inputs},
                                                 {"single", Study::Single}};
  return m;
}

inline std::string to_string(Study s) {
  for (const auto& [name, v] : study_names())
    if (v == s) return name;
  return "?";
}

struct PhotonSpec {
  std::string kind = "gaussian";  // gaussian | schmidt | file
  double tau = 0.1;               // ps
  double center = 0.0;            // ps
  int mode = 1;                   // Schmidt mode number, 1-based
  std::optional<double> source_f_R;
  bool filtered = false;          // Schmidt modes of the filtered operator
  std::string path;               // CSV with t (ps), re, im (ps^-1/2)
};

struct SweepSpec {
  std::string parameter;
  std::vector<double> values;
};

struct CaseSpec {
  std::string label;
  std::vector<std::pair<std::string, double>> values;
  std::optional<Polarization> polarization;
};

/// A fully parsed scenario. Physical units: ps, rad/ps, m, W, K; Omega in THz (Omega / 2 pi).
struct ScenarioConfig {
  std::string name = "scenario";
  RunMode mode = RunMode::CW;
  Study study = Study::Single;

  // fiber
  double gamma = 1.0;  // 1/(W m)
  double f_R = 0.18;
  double P0 = 1.0;      // W, CW pump power
  double length = 1.0;  // m
  std::string length_rule = "fixed";  // fixed | optimal
  std::optional<double> gamma_P0_l;   // CW: sets length = gamma_P0_l / (gamma P0)
  double dbeta = 0.0;                 // 1/m
  double beta1i = 0.0, beta1s = 0.0;  // ps/m (CW only; pulsed runs use the collision frame)
  double beta2i = 0.0, beta2s = 0.0;  // ps^2/m
  double T = 300.0;                   // K
  double Omega_THz = 17.0;
  Polarization polarization = Polarization::Copolarized;

  // pulsed pumps
  double gamma_P_l_over_pi = 4.0;
  double tau = 0.1;     // ps
  double delay = 0.6;   // ps
  double dn_eff = 1e-3;
  double beta2p = 0.0, beta2q = 0.0;  // ps^2/m
  bool flat_pumps = false;

  PhotonSpec photon;
  double filter_width = 20.0;  // rad/ps; 0 means all-pass
  double filter_center = 0.0;  // rad/ps
  double window = 10.0;        // ps

  int grid_n = 1024;
  double grid_dt = 0.01;  // ps

  int steps = 60;
  int raman_iterations = 3;
  bool far_pump_xpm = false;
  int z_stride = 1;
  double schmidt_cut = 0.0;  // rad/ps; 0 selects Nyquist / 2
  int omega_intervals = 2000;
  int z_intervals = 64;
  double convergence_band = 40.0;  // rad/ps

  int schmidt_coefficients = 3;
  double modes_at_gamma_P_l_over_pi = 4.0;
  double map_span = 2.0;  // ps
  int map_points = 101;
  double t_in = -0.3;  // ps, Gaussian input of the input comparison

  std::optional<SweepSpec> sweep;
  std::vector<CaseSpec> cases;
  std::string output_directory = "out";

  double Omega() const { return 2.0 * kPi * Omega_THz; }
};

// ------------------------------------------------------------- parameters

/// Names accepted by sweep.parameter and case entries.
inline const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = {
      "gamma", "f_R", "P0", "length", "gamma_P0_l", "dbeta", "beta1i", "beta1s", "beta2i", "beta2s", "T",
      "Omega_THz", "gamma_P_l_over_pi", "tau", "delay", "dn_eff", "beta2p", "beta2q", "window", "filter_width",
      "photon_tau", "photon_center", "steps", "raman_iterations"};
  return names;
}

inline void set_parameter(ScenarioConfig& c, const std::string& name, double v) {
  if (!std::isfinite(v)) throw ConfigError("parameter '" + name + "' must be finite");
  const auto as_int = [&](int& out) {
    if (v != std::floor(v) || v < 1 || v > 1e7) throw ConfigError("parameter '" + name + "' must be a positive integer");
    out = static_cast<int>(v);
  };
  if (name == "gamma") c.gamma = v;
  else if (name == "f_R") c.f_R = v;
  else if (name == "P0") c.P0 = v;
  else if (name == "length") { c.length = v; c.gamma_P0_l.reset(); c.length_rule = "fixed"; }
  else if (name == "gamma_P0_l") { c.gamma_P0_l = v; c.length_rule = "fixed"; }
  else if (name == "dbeta") c.dbeta = v;
  else if (name == "beta1i") c.beta1i = v;
  else if (name == "beta1s") c.beta1s = v;
  else if (name == "beta2i") c.beta2i = v;
  else if (name == "beta2s") c.beta2s = v;
  else if (name == "T") c.T = v;
  else if (name == "Omega_THz") c.Omega_THz = v;
  else if (name == "gamma_P_l_over_pi") c.gamma_P_l_over_pi = v;
  else if (name == "tau") c.tau = v;
  else if (name == "delay") c.delay = v;
  else if (name == "dn_eff") c.dn_eff = v;
  else if (name == "beta2p") c.beta2p = v;
  else if (name == "beta2q") c.beta2q = v;
  else if (name == "window") c.window = v;
  else if (name == "filter_width") c.filter_width = v;
  else if (name == "photon_tau") c.photon.tau = v;
  else if (name == "photon_center") c.photon.center = v;
  else if (name == "steps") as_int(c.steps);
  else if (name == "raman_iterations") as_int(c.raman_iterations);
  else throw ConfigError("unknown parameter '" + name + "'");
}

inline void validate(const ScenarioConfig& c) {
  const auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  for (double v : {c.gamma, c.f_R, c.P0, c.length, c.dbeta, c.beta1i, c.beta1s, c.beta2i, c.beta2s, c.T, c.Omega_THz,
                   c.gamma_P_l_over_pi, c.tau, c.delay, c.dn_eff, c.beta2p, c.beta2q, c.filter_width,
                   c.filter_center, c.window, c.grid_dt, c.schmidt_cut, c.map_span, c.photon.tau, c.photon.center})
    need(std::isfinite(v), "all physical values must be finite");
  need(c.gamma > 0.0, "fiber.gamma must be > 0");
  need(c.f_R >= 0.0 && c.f_R <= 1.0, "fiber.f_R must lie in [0, 1]");
  need(c.P0 >= 0.0, "fiber.P0 must be >= 0");
  need(c.length > 0.0, "fiber.length must be > 0");
  need(!c.gamma_P0_l || *c.gamma_P0_l > 0.0, "fiber.gamma_P0_l must be > 0");
  need(c.length_rule == "fixed" || c.length_rule == "optimal", "fiber.length_rule must be 'fixed' or 'optimal'");
  need(c.T >= 0.0, "fiber.T must be >= 0");
  need(c.gamma_P_l_over_pi >= 0.0, "pulse.gamma_P_l_over_pi must be >= 0");
  need(c.tau > 0.0 && c.delay > 0.0 && c.dn_eff > 0.0, "pulse.tau, pulse.delay and pulse.dn_eff must be > 0");
  need(c.filter_width >= 0.0, "filter.width must be >= 0");
  need(c.window > 0.0, "detector.window must be > 0");
  need(c.grid_n >= 8 && c.grid_dt > 0.0, "grid.n must be >= 8 and grid.dt > 0");
  need(c.steps >= 1 && c.raman_iterations >= 1 && c.z_stride >= 1, "numerics steps, raman_iterations, z_stride >= 1");
  need(c.omega_intervals >= 2 && c.omega_intervals % 2 == 0, "numerics.omega_intervals must be even and >= 2");
  need(c.z_intervals >= 2 && c.z_intervals % 2 == 0, "numerics.z_intervals must be even and >= 2");
  need(c.schmidt_cut >= 0.0 && c.convergence_band > 0.0, "numerics.schmidt_cut >= 0, convergence_band > 0");
  need(c.schmidt_coefficients >= 1 && c.map_points >= 2 && c.map_span > 0.0, "outputs settings out of range");
  need(c.photon.kind == "gaussian" || c.photon.kind == "schmidt" || c.photon.kind == "file",
       "photon.kind must be gaussian, schmidt or file");
  need(c.photon.tau > 0.0 && c.photon.mode >= 1, "photon.tau must be > 0 and photon.mode >= 1");
  need(c.photon.kind != "file" || !c.photon.path.empty(), "photon.path is required for kind 'file'");
  need(!c.photon.source_f_R || (*c.photon.source_f_R >= 0.0 && *c.photon.source_f_R <= 1.0),
       "photon.source_f_R must lie in [0, 1]");
  if (c.sweep) {
    need(!c.sweep->values.empty(), "sweep range is empty");
    for (double v : c.sweep->values) need(std::isfinite(v), "sweep values must be finite");
  }
  const bool pulsed_study = c.study == Study::Green || c.study == Study::Schmidt || c.study == Study::Inputs;
  const bool cw_study = c.study == Study::Flux || c.study == Study::G2Map || c.study == Study::G2Click;
  need(!(pulsed_study && c.mode != RunMode::Pulsed), "study '" + to_string(c.study) + "' requires mode: pulsed");
  need(!(cw_study && c.mode != RunMode::CW), "study '" + to_string(c.study) + "' requires mode: cw");
  need(!(c.mode == RunMode::CW && c.photon.kind == "schmidt"), "photon.kind 'schmidt' requires mode: pulsed");
  need(!((c.study == Study::G2Map || c.study == Study::Green) && c.sweep), "this study does not take a sweep");
  need(!(c.study == Study::Inputs && c.sweep && c.sweep->parameter != "Omega_THz"),
       "study 'inputs' sweeps Omega_THz only");
  std::set<std::string> labels;
  for (const auto& k : c.cases) need(labels.insert(k.label).second, "duplicate case label '" + k.label + "'");
}

// ---------------------------------------------------------------- parsing

namespace detail {

/// One YAML mapping whose keys must all be consumed.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::string file) : node_(node), path_(std::move(path)), file_(std::move(file)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(node_, "'" + path_ + "' must be a mapping");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(key);
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = convert<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) fail(node_, "missing required key '" + qualified(key) + "'");
    return convert<T>(key);
  }

  YAML::Node child(const std::string& key) {
    used_.insert(key);
    return node_ && node_.IsMap() ? node_[key] : YAML::Node();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) fail(kv.first, "unknown key '" + qualified(key) + "'");
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    std::string where = file_;
    if (at && at.Mark().line >= 0) where += ":" + std::to_string(at.Mark().line + 1);
    throw ConfigError(where + ": " + what);
  }

  const std::string& file() const { return file_; }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  T convert(const std::string& key) const {
    const YAML::Node v = node_[key];
    try {
      if constexpr (std::is_same_v<T, double>) {
        const auto d = v.as<double>();
        if (!std::isfinite(d)) fail(v, "'" + qualified(key) + "' must be finite");
        return d;
      } else {
        return v.as<T>();
      }
    } catch (const YAML::BadConversion&) {
      const char* kind = std::is_same_v<T, double> ? "a number" : std::is_same_v<T, int> ? "an integer"
                         : std::is_same_v<T, bool> ? "true or false" : "a string";
      fail(v, "'" + qualified(key) + "' must be " + kind);
    }
  }

  YAML::Node node_;
  std::string path_, file_;
  std::set<std::string> used_;
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return v;
}

}  // namespace detail

/// Parses a config document. `file` is only used in diagnostics.
inline ScenarioConfig parse_config(const YAML::Node& root, const std::string& file = "<config>") {
  using detail::Section;
  if (!root || !root.IsMap()) throw ConfigError(file + ": the config must be a mapping");
  Section top(root, "", file);
  const int version = top.require<int>("schema_version");
  if (version != kSchemaVersion)
    top.fail(root["schema_version"], "unsupported schema_version " + std::to_string(version) + " (expected 1)");

  ScenarioConfig c;
  top.get("name", c.name);
  const auto mode = top.require<std::string>("mode");
  if (mode == "cw") c.mode = RunMode::CW;
  else if (mode == "pulsed") c.mode = RunMode::Pulsed;
  else top.fail(root["mode"], "mode must be 'cw' or 'pulsed'");
  const auto study = top.require<std::string>("study");
  const auto it = study_names().find(study);
  if (it == study_names().end()) top.fail(root["study"], "unknown study '" + study + "'");
  c.study = it->second;

  Section fiber(top.child("fiber"), "fiber", file);
  fiber.get("gamma", c.gamma);
  fiber.get("f_R", c.f_R);
  fiber.get("P0", c.P0);
  fiber.get("length", c.length);
  fiber.get("length_rule", c.length_rule);
  fiber.get("gamma_P0_l", c.gamma_P0_l);
  fiber.get("dbeta", c.dbeta);
  fiber.get("beta1i", c.beta1i);
  fiber.get("beta1s", c.beta1s);
  fiber.get("beta2i", c.beta2i);
  fiber.get("beta2s", c.beta2s);
  fiber.get("T", c.T);
  fiber.get("Omega_THz", c.Omega_THz);
  if (fiber.has("polarization")) {
    try {
      c.polarization = polarization_from_string(fiber.require<std::string>("polarization"));
    } catch (const std::invalid_argument& e) {
      fiber.fail(root["fiber"]["polarization"], e.what());
    }
  }
  fiber.finish();

  Section pulse(top.child("pulse"), "pulse", file);
  pulse.get("gamma_P_l_over_pi", c.gamma_P_l_over_pi);
  pulse.get("tau", c.tau);
  pulse.get("delay", c.delay);
  pulse.get("dn_eff", c.dn_eff);
  pulse.get("beta2p", c.beta2p);
  pulse.get("beta2q", c.beta2q);
  pulse.get("flat", c.flat_pumps);
  pulse.get("t_in", c.t_in);
  pulse.finish();

  Section photon(top.child("photon"), "photon", file);
  photon.get("kind", c.photon.kind);
  photon.get("tau", c.photon.tau);
  photon.get("center", c.photon.center);
  photon.get("mode", c.photon.mode);
  photon.get("source_f_R", c.photon.source_f_R);
  photon.get("filtered", c.photon.filtered);
  photon.get("path", c.photon.path);
  photon.finish();

  Section filter(top.child("filter"), "filter", file);
  if (filter.has("width")) {
    const YAML::Node w = root["filter"]["width"];
    if (w.IsScalar() && w.Scalar() == "all_pass") c.filter_width = 0.0;
    else c.filter_width = filter.require<double>("width");
  }
  filter.get("center", c.filter_center);
  filter.finish();

  Section detector(top.child("detector"), "detector", file);
  detector.get("window", c.window);
  detector.finish();

  Section grid(top.child("grid"), "grid", file);
  grid.get("n", c.grid_n);
  grid.get("dt", c.grid_dt);
  grid.finish();

  Section num(top.child("numerics"), "numerics", file);
  num.get("steps", c.steps);
  num.get("raman_iterations", c.raman_iterations);
  num.get("far_pump_xpm", c.far_pump_xpm);
  num.get("z_stride", c.z_stride);
  num.get("schmidt_cut", c.schmidt_cut);
  num.get("omega_intervals", c.omega_intervals);
  num.get("z_intervals", c.z_intervals);
  num.get("convergence_band", c.convergence_band);
  num.finish();

  Section outs(top.child("outputs"), "outputs", file);
  outs.get("schmidt_coefficients", c.schmidt_coefficients);
  outs.get("modes_at_gamma_P_l_over_pi", c.modes_at_gamma_P_l_over_pi);
  outs.get("map_span", c.map_span);
  outs.get("map_points", c.map_points);
  outs.get("directory", c.output_directory);
  outs.finish();

  const YAML::Node sw = top.child("sweep");
  if (sw && !sw.IsNull()) {
    Section s(sw, "sweep", file);
    SweepSpec spec;
    spec.parameter = s.require<std::string>("parameter");
    const auto& names = parameter_names();
    if (std::find(names.begin(), names.end(), spec.parameter) == names.end())
      s.fail(sw["parameter"], "unknown sweep parameter '" + spec.parameter + "'");
    if (s.has("values")) {
      const YAML::Node v = s.child("values");
      if (!v.IsSequence() || v.size() == 0) s.fail(v, "sweep.values must be a nonempty list");
      for (const auto& x : v) {
        try {
          spec.values.push_back(x.as<double>());
        } catch (const YAML::BadConversion&) {
          s.fail(x, "sweep.values entries must be numbers");
        }
      }
      if (s.has("start") || s.has("stop") || s.has("count")) s.fail(sw, "give either sweep.values or start/stop/count");
    } else {
      const double a = s.require<double>("start"), b = s.require<double>("stop");
      const int n = s.require<int>("count");
      if (n < 1) s.fail(sw["count"], "sweep.count must be >= 1 (empty sweep range)");
      spec.values = detail::linspace(a, b, n);
    }
    s.finish();
    c.sweep = spec;
  }

  const YAML::Node cs = top.child("cases");
  if (cs && !cs.IsNull()) {
    if (!cs.IsSequence()) top.fail(cs, "cases must be a list");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const YAML::Node n = cs[k];
      if (!n.IsMap()) top.fail(n, "each case must be a mapping");
      CaseSpec cse;
      for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (key == "label") {
          cse.label = kv.second.as<std::string>();
        } else if (key == "polarization") {
          try {
            cse.polarization = polarization_from_string(kv.second.as<std::string>());
          } catch (const std::exception& e) {
            top.fail(kv.second, e.what());
          }
        } else {
          const auto& names = parameter_names();
          if (std::find(names.begin(), names.end(), key) == names.end())
            top.fail(kv.first, "unknown key 'cases[" + std::to_string(k) + "]." + key + "'");
          try {
            cse.values.emplace_back(key, kv.second.as<double>());
          } catch (const YAML::BadConversion&) {
            top.fail(kv.second, "case value '" + key + "' must be a number");
          }
        }
      }
      if (cse.label.empty()) top.fail(n, "case " + std::to_string(k) + " needs a label");
      c.cases.push_back(std::move(cse));
    }
  }
  top.finish();

  try {
    validate(c);
    // Case values go through the same checks as the base values.
    for (const auto& cse : c.cases) {
      ScenarioConfig probe = c;
      for (const auto& [k, v] : cse.values) set_parameter(probe, k, v);
      validate(probe);
    }
  } catch (const ConfigError& e) {
    throw ConfigError(file + ": " + e.what());
  }
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(path + ": cannot read file");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return parse_config(root, path);
}

/// Canonical JSON of the parsed config; its FNV-1a hash identifies the run.
inline nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = c.name;
  j["mode"] = c.mode == RunMode::CW ? "cw" : "pulsed";
  j["study"] = to_string(c.study);
  j["fiber"] = {{"gamma", c.gamma},   {"f_R", c.f_R},       {"P0", c.P0},         {"length", c.length},
                {"length_rule", c.length_rule}, {"dbeta", c.dbeta}, {"beta1i", c.beta1i}, {"beta1s", c.beta1s},
                {"beta2i", c.beta2i}, {"beta2s", c.beta2s}, {"T", c.T},           {"Omega_THz", c.Omega_THz},
                {"polarization", to_string(c.polarization)}};
  if (c.gamma_P0_l) j["fiber"]["gamma_P0_l"] = *c.gamma_P0_l;
  j["pulse"] = {{"gamma_P_l_over_pi", c.gamma_P_l_over_pi}, {"tau", c.tau},       {"delay", c.delay},
                {"dn_eff", c.dn_eff}, {"beta2p", c.beta2p}, {"beta2q", c.beta2q}, {"flat", c.flat_pumps},
                {"t_in", c.t_in}};
  j["photon"] = {{"kind", c.photon.kind}, {"tau", c.photon.tau},         {"center", c.photon.center},
                 {"mode", c.photon.mode}, {"filtered", c.photon.filtered}, {"path", c.photon.path}};
  if (c.photon.source_f_R) j["photon"]["source_f_R"] = *c.photon.source_f_R;
  j["filter"] = {{"width", c.filter_width}, {"center", c.filter_center}};
  j["detector"] = {{"window", c.window}};
  j["grid"] = {{"n", c.grid_n}, {"dt", c.grid_dt}};
  j["numerics"] = {{"steps", c.steps},
                   {"raman_iterations", c.raman_iterations},
                   {"far_pump_xpm", c.far_pump_xpm},
                   {"z_stride", c.z_stride},
                   {"schmidt_cut", c.schmidt_cut},
                   {"omega_intervals", c.omega_intervals},
                   {"z_intervals", c.z_intervals},
                   {"convergence_band", c.convergence_band}};
  j["outputs"] = {{"schmidt_coefficients", c.schmidt_coefficients},
                  {"modes_at_gamma_P_l_over_pi", c.modes_at_gamma_P_l_over_pi},
                  {"map_span", c.map_span},
                  {"map_points", c.map_points},
                  {"directory", c.output_directory}};
  if (c.sweep) j["sweep"] = {{"parameter", c.sweep->parameter}, {"values", c.sweep->values}};
  j["cases"] = nlohmann::json::array();
  for (const auto& k : c.cases) {
    nlohmann::json e = {{"label", k.label}};
    for (const auto& [n, v] : k.values) e[n] = v;
    if (k.polarization) e["polarization"] = to_string(*k.polarization);
    j["cases"].push_back(e);
  }
  return j;
}

inline std::string config_hash(const ScenarioConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

// ------------------------------------------------------- building blocks

inline TimeGrid make_grid(const ScenarioConfig& c) { return TimeGrid(c.grid_n, c.grid_dt); }

inline SpectralFilter make_filter(const ScenarioConfig& c) {
  if (c.filter_width > 0.0 && std::abs(c.filter_center) + 0.5 * c.filter_width > kPi / c.grid_dt)
    throw ConfigError("filter band extends beyond the grid Nyquist frequency pi / dt");
  return c.filter_width == 0.0 ? SpectralFilter::all_pass() : SpectralFilter::rectangular(c.filter_width, c.filter_center);
}

inline PropagationConfig make_propagation(const ScenarioConfig& c) {
  PropagationConfig p;
  p.steps = c.steps;
  p.raman_iterations = c.raman_iterations;
  p.far_pump_xpm = c.far_pump_xpm;
  return p;
}

/// CW fiber; the length follows gamma_P0_l or the optimal-length rule when set.
inline std::pair<FiberScenario, RamanResponse> make_cw(const ScenarioConfig& c) {
  FiberScenario s;
  s.gamma = c.gamma;
  s.f_R = c.f_R;
  s.P0 = c.P0;
  s.length = c.length;
  s.dbeta = c.dbeta;
  s.beta1i = c.beta1i;
  s.beta1s = c.beta1s;
  s.beta2i = c.beta2i;
  s.beta2s = c.beta2s;
  s.T = c.T;
  s.Omega = c.Omega();
  s.config = c.polarization;
  auto r = s.silica_response();
  if (c.gamma_P0_l) {
    if (!(c.P0 > 0.0)) throw ConfigError("fiber.gamma_P0_l needs P0 > 0");
    s.length = *c.gamma_P0_l / (c.gamma * c.P0);
  } else if (c.length_rule == "optimal") {
    s.length = optimal_length(s, r);
  }
  s.validate();
  return {s, r};
}

/// Pump collision (pump p with the idler, q with the signal) meeting at the fiber midpoint.
inline PulsedScenario make_pulsed(const ScenarioConfig& c) {
  auto s = collision_scenario(kPi * c.gamma_P_l_over_pi, c.f_R, c.Omega(), c.tau, c.delay, c.gamma, c.dn_eff);
  s.fiber.T = c.T;
  s.fiber.config = c.polarization;
  s.fiber.dbeta = c.dbeta;
  s.fiber.beta2i = c.beta2i;
  s.fiber.beta2s = c.beta2s;
  s.beta2p = c.beta2p;
  s.beta2q = c.beta2q;
  s.flat_pumps = c.flat_pumps;
  s.fiber.validate();
  return s;
}

inline InputComparisonSetup make_input_setup(const ScenarioConfig& c) {
  InputComparisonSetup st;
  st.gamma_P_l = kPi * c.gamma_P_l_over_pi;
  st.f_R = c.f_R;
  st.T = c.T;
  st.tau = c.tau;
  st.delay = c.delay;
  st.dn_eff = c.dn_eff;
  st.gamma = c.gamma;
  st.config = c.polarization;
  st.grid = make_grid(c);
  st.propagation = make_propagation(c);
  st.filter = make_filter(c);
  st.window = c.window;
  st.t_in = c.t_in;
  st.cw_gamma_P0 = c.gamma * c.P0;
  return st;
}

/// Reads a photon amplitude CSV (t, re, im; '#' comments, one header line) and
/// interpolates it linearly onto the grid (zero outside the tabulated range).
inline SampledField load_photon_csv(const std::string& path, const TimeGrid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot read photon file");
  std::vector<double> t, re, im;
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    double v[3];
    for (double& x : v) {
      if (!std::getline(ss, cell, ',')) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected t,re,im");
      try {
        x = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
    }
    if (!t.empty() && !(v[0] > t.back())) throw ConfigError(path + ":" + std::to_string(lineno) + ": t must increase");
    t.push_back(v[0]);
    re.push_back(v[1]);
    im.push_back(v[2]);
  }
  if (t.size() < 2) throw ConfigError(path + ": at least two samples are needed");
  SampledField f = SampledField::zeros(grid);
  for (int k = 0; k < grid.size(); ++k) {
    const double x = grid.t(k);
    if (x < t.front() || x > t.back()) continue;
    const auto j = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
    const std::size_t a = std::min(j, t.size() - 1) - 1;
    const double w = (x - t[a]) / (t[a + 1] - t[a]);
    f.values[k] = {(1.0 - w) * re[a] + w * re[a + 1], (1.0 - w) * im[a] + w * im[a + 1]};
  }
  return f;
}

// ------------------------------------------------------------- execution

/// Worker count from FWMBS_WORKERS (default: hardware concurrency).
inline int worker_count() {
  if (const char* env = std::getenv("FWMBS_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024)
      throw ConfigError("FWMBS_WORKERS must be a positive integer, got '" + std::string(env) + "'");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(0..count-1) on a pool of workers; results keep index order.
template <class R, class Fn>
std::vector<R> parallel_map(int count, int workers, Fn fn) {
  std::vector<R> out(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        out[k] = fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// One evaluation point: a case (or the base config) at one sweep value.
struct RunPoint {
  std::string label;
  std::optional<double> x;
  ScenarioConfig config;
};

inline std::vector<RunPoint> expand_points(const ScenarioConfig& c) {
  std::vector<CaseSpec> cases = c.cases;
  if (cases.empty()) cases.push_back({"base", {}, std::nullopt});
  std::vector<RunPoint> out;
  for (const auto& k : cases) {
    ScenarioConfig base = c;
    for (const auto& [n, v] : k.values) set_parameter(base, n, v);
    if (k.polarization) base.polarization = *k.polarization;
    if (!c.sweep) {
      out.push_back({k.label, std::nullopt, base});
      continue;
    }
    for (double v : c.sweep->values) {
      ScenarioConfig p = base;
      set_parameter(p, c.sweep->parameter, v);
      out.push_back({k.label, v, p});
    }
  }
  return out;
}

struct StudyResult {
  struct Table {
    std::string name, description;
    CsvTable table;
  };
  std::vector<Table> tables;
  nlohmann::json metrics = nlohmann::json::object();
};

namespace detail {

inline std::string sweep_column(const ScenarioConfig& c) {
  static const std::map<std::string, std::string> units = {
      {"gamma", "1/(W m)"}, {"P0", "W"},       {"length", "m"},         {"dbeta", "1/m"},
      {"beta1i", "ps/m"},   {"beta1s", "ps/m"}, {"beta2i", "ps^2/m"},   {"beta2s", "ps^2/m"},
      {"beta2p", "ps^2/m"}, {"beta2q", "ps^2/m"}, {"T", "K"},           {"Omega_THz", "THz"},
      {"tau", "ps"},        {"delay", "ps"},    {"window", "ps"},       {"filter_width", "rad/ps"},
      {"photon_tau", "ps"}, {"photon_center", "ps"}};
  if (!c.sweep) return "point (1)";
  const auto it = units.find(c.sweep->parameter);
  return c.sweep->parameter + " (" + (it == units.end() ? "1" : it->second) + ")";
}

inline std::string safe_label(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  return out;
}

/// Samples within +-span/2 of `center`, thinned to at most `points` per axis.
inline std::vector<int> map_indices(const TimeGrid& g, double center, double span, int points) {
  std::vector<int> idx;
  for (int k = 0; k < g.size(); ++k)
    if (std::abs(g.t(k) - center) <= 0.5 * span) idx.push_back(k);
  const int stride = std::max<int>(1, static_cast<int>((idx.size() + points - 1) / points));
  std::vector<int> out;
  for (std::size_t k = 0; k < idx.size(); k += stride) out.push_back(idx[k]);
  return out;
}

inline SampledField photon_for(const ScenarioConfig& c, const TimeGrid& g, const ComplexMatrix* G_is,
                               const PulsedScenario* s) {
  if (c.photon.kind == "gaussian") return gaussian_photon(g, c.photon.tau, c.photon.center);
  if (c.photon.kind == "file") return load_photon_csv(c.photon.path, g);
  // Schmidt input mode of the source run (same scenario, possibly another f_R).
  const double cut = c.schmidt_cut > 0.0 ? c.schmidt_cut : default_schmidt_cut(g);
  ComplexMatrix source;
  const double fR = c.photon.source_f_R.value_or(c.f_R);
  if (fR == c.f_R && G_is) {
    source = *G_is;
  } else {
    PulsedScenario src = *s;
    src.fiber.f_R = fR;
    const auto r = src.fiber.silica_response();
    source = GreenPropagator(src.fiber, r, src.initial_pumps(g), make_propagation(c)).propagate_signal_inputs().first;
  }
  const auto d = c.photon.filtered ? decompose_filtered(source, g, make_filter(c), cut) : decompose_band(source, g, cut);
  if (c.photon.mode > d.rank()) throw ConfigError("photon.mode exceeds the number of Schmidt modes");
  return d.input_mode(c.photon.mode - 1);
}

}  // namespace detail

// ---------------------------------------------------------------- studies

inline StudyResult run_flux(const ScenarioConfig& c, int workers) {
  const auto pts = expand_points(c);
  const auto rows = parallel_map<RelativeFlux>(static_cast<int>(pts.size()), workers, [&](int k) {
    const auto [s, r] = make_cw(pts[k].config);
    return cw_relative_flux(s, r);
  });
  StudyResult out;
  CsvTable t({"case (label)", detail::sweep_column(c), "length (m)", "conversion |G_is|^2 (1)",
              "relative_flux_first_order (1)", "relative_flux_exact (1)"});
  std::map<std::string, double> peak;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double len = make_cw(pts[k].config).first.length;
    t.row({pts[k].label, format_number(pts[k].x.value_or(0.0)), format_number(len), format_number(rows[k].conversion),
           format_number(rows[k].first_order), format_number(rows[k].exact)});
    peak[pts[k].label] = std::max(peak.count(pts[k].label) ? peak[pts[k].label] : 0.0, rows[k].first_order);
  }
  out.tables.push_back({"relative_flux.csv", "relative output flux at filter width / I_in = 1", t});
  for (const auto& [label, v] : peak) out.metrics["peak_relative_flux"][label] = v;
  return out;
}

inline StudyResult run_g2_map(const ScenarioConfig& c, int workers) {
  (void)workers;
  StudyResult out;
  for (const auto& p : expand_points(c)) {
    const auto& pc = p.config;
    const auto [s, r] = make_cw(pc);
    const TimeGrid g = make_grid(pc);
    const auto photon = detail::photon_for(pc, g, nullptr, nullptr);
    const auto cw = cw_correlation(s, r, photon, make_filter(pc), pc.window, pc.omega_intervals, pc.z_intervals);
    const auto& res = cw.result;
    const auto lim = g2_limits(res, cw.peak, 5.0 * pc.photon.tau);
    const std::string tag = c.cases.empty() ? "" : "_" + detail::safe_label(p.label);

    const auto idx = detail::map_indices(g, g.t(cw.peak), pc.map_span, pc.map_points);
    CsvTable map({"t1 (ps)", "t2 (ps)", "g2 (1)"});
    for (int a : idx)
      for (int b : idx) map.row(std::vector<double>{g.t(a), g.t(b), res.g2(a, b)});
    out.tables.push_back({"g2_map" + tag + ".csv", "g2(t1, t2) around the photon peak", map});

    CsvTable cut({"t (ps)", "I_out (1/ps)", "photon |psi_out|^2 (1/ps)", "noise_E_tt (1/ps)", "g2_zero_delay (1)",
                  "g2_from_peak (1)"});
    for (int k = 0; k < g.size(); ++k)
      cut.row(std::vector<double>{g.t(k), res.I_out[k], std::norm(cw.psi_out.values[k]), res.E(k, k).real(),
                                  res.g2(k, k), res.g2(cw.peak, k)});
    out.tables.push_back({"g2_cross_sections" + tag + ".csv", "zero-delay and peak cross-sections of g2", cut});

    auto& m = out.metrics[p.label];
    m["length_m"] = s.length;
    m["t_peak_ps"] = g.t(cw.peak);
    m["g2_at_peak"] = lim.at_peak;
    m["g2_far_min"] = lim.far_min;
    m["g2_far_max"] = lim.far_max;
    m["g2_click"] = res.g2_click;
    m["conversion"] = cw.conversion;
  }
  return out;
}

inline StudyResult run_g2_click(const ScenarioConfig& c, int workers) {
  const auto pts = expand_points(c);
  struct Row {
    double length, g2, approx, conversion, noise;
  };
  const auto rows = parallel_map<Row>(static_cast<int>(pts.size()), workers, [&](int k) {
    const auto& pc = pts[k].config;
    const auto [s, r] = make_cw(pc);
    const TimeGrid g = make_grid(pc);
    const auto f = make_filter(pc);
    const auto photon = detail::photon_for(pc, g, nullptr, nullptr);
    const auto out = filtered_psi_out(s, r, photon, f);
    const ComplexMatrix E = phonon_expectation_cw(s, r, f, g, pc.omega_intervals, pc.z_intervals);
    const auto m = windowed_moments(out, E, pc.window);
    const double approx = f.is_all_pass() ? std::nan("") : g2_click_approx(s, r, pc.window, f.width).value;
    return Row{s.length, m.numerator / (m.flux() * m.flux()), approx, m.photon, m.noise};
  });
  StudyResult out;
  CsvTable t({"case (label)", detail::sweep_column(c), "length (m)", "g2_click (1)", "g2_click_approx (1)",
              "conversion probability (1)", "noise photons (1)"});
  std::map<std::string, double> lowest;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& r = rows[k];
    t.row({pts[k].label, format_number(pts[k].x.value_or(0.0)), format_number(r.length), format_number(r.g2),
           format_number(r.approx), format_number(r.conversion), format_number(r.noise)});
    const auto it = lowest.find(pts[k].label);
    lowest[pts[k].label] = it == lowest.end() ? r.g2 : std::min(it->second, r.g2);
  }
  out.tables.push_back({"g2_click.csv", "window-integrated g2 with CW pumps", t});
  for (const auto& [label, v] : lowest) out.metrics["min_g2_click"][label] = v;
  return out;
}

inline StudyResult run_green(const ScenarioConfig& c, int workers) {
  const auto pts = expand_points(c);
  struct Row {
    CsvTable map{{"t (ps)", "t' (ps)", "|G_is| / max (1)"}};
    CausalityMass mass;
    double max_abs = 0.0;
  };
  const auto rows = parallel_map<Row>(static_cast<int>(pts.size()), workers, [&](int k) {
    const auto& pc = pts[k].config;
    const auto s = make_pulsed(pc);
    const auto r = s.fiber.silica_response();
    const TimeGrid g = make_grid(pc);
    const auto G = GreenPropagator(s.fiber, r, s.initial_pumps(g), make_propagation(pc)).propagate_signal_inputs().first;
    Row row;
    row.max_abs = G.cwiseAbs().maxCoeff();
    row.mass = causality_mass(G, g, s.fiber.beta1i * s.fiber.length, s.fiber.beta1s * s.fiber.length, g.dt());
    const auto idx = detail::map_indices(g, 0.0, pc.map_span, pc.map_points);
    for (int a : idx)
      for (int b : idx) row.map.row(std::vector<double>{g.t(a), g.t(b), std::abs(G(a, b)) / row.max_abs});
    return row;
  });
  StudyResult out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::string tag = c.cases.empty() ? "" : "_" + detail::safe_label(pts[k].label);
    out.tables.push_back({"green_is" + tag + ".csv", "normalised |G_is(l, t, t')|", rows[k].map});
    auto& m = out.metrics[pts[k].label];
    m["max_abs_G_is_per_ps"] = rows[k].max_abs;
    m["mass_outside_causality_lines"] = rows[k].mass.outside;
    m["mass_beyond_slow_line"] = rows[k].mass.beyond_slow;
  }
  return out;
}

inline StudyResult run_schmidt(const ScenarioConfig& c, int workers) {
  auto pts = expand_points(c);
  // One extra point per case for the mode shapes.
  std::vector<RunPoint> mode_pts;
  std::vector<CaseSpec> cases = c.cases;
  if (cases.empty()) cases.push_back({"base", {}, std::nullopt});
  for (const auto& k : cases) {
    ScenarioConfig p = c;
    for (const auto& [n, v] : k.values) set_parameter(p, n, v);
    if (k.polarization) p.polarization = *k.polarization;
    p.gamma_P_l_over_pi = c.modes_at_gamma_P_l_over_pi;
    mode_pts.push_back({k.label, std::nullopt, p});
  }
  const int n_main = static_cast<int>(pts.size());
  pts.insert(pts.end(), mode_pts.begin(), mode_pts.end());
  const auto decs = parallel_map<SchmidtDecomposition>(static_cast<int>(pts.size()), workers, [&](int k) {
    const auto& pc = pts[k].config;
    const auto s = make_pulsed(pc);
    const auto r = s.fiber.silica_response();
    const TimeGrid g = make_grid(pc);
    const auto G = GreenPropagator(s.fiber, r, s.initial_pumps(g), make_propagation(pc)).propagate_signal_inputs().first;
    return decompose_band(G, g, pc.schmidt_cut > 0.0 ? pc.schmidt_cut : default_schmidt_cut(g));
  });
  StudyResult out;
  std::vector<std::string> header = {"case (label)", detail::sweep_column(c)};
  for (int n = 1; n <= c.schmidt_coefficients; ++n) header.push_back("lambda" + std::to_string(n) + " (1)");
  header.push_back("rms_duration_u1 (ps)");
  CsvTable t(header);
  for (int k = 0; k < n_main; ++k) {
    std::vector<std::string> row = {pts[k].label, format_number(pts[k].x.value_or(c.gamma_P_l_over_pi))};
    for (int n = 0; n < c.schmidt_coefficients; ++n)
      row.push_back(format_number(n < decs[k].rank() ? decs[k].coefficients[n] : 0.0));
    row.push_back(format_number(rms_duration(decs[k].input_mode(0))));
    t.row(row);
  }
  out.tables.push_back({"schmidt_coefficients.csv", "Schmidt coefficients of G_is", t});
  for (std::size_t m = 0; m < mode_pts.size(); ++m) {
    const auto& d = decs[n_main + m];
    CsvTable modes({"t (ps)", "u1_re (ps^-1/2)", "u1_im (ps^-1/2)", "v1_re (ps^-1/2)", "v1_im (ps^-1/2)",
                    "u2_re (ps^-1/2)", "u2_im (ps^-1/2)", "v2_re (ps^-1/2)", "v2_im (ps^-1/2)"});
    for (int k = 0; k < d.grid.size(); ++k)
      modes.row(std::vector<double>{d.grid.t(k), d.input_modes(k, 0).real(), d.input_modes(k, 0).imag(),
                                    d.output_modes(k, 0).real(), d.output_modes(k, 0).imag(),
                                    d.input_modes(k, 1).real(), d.input_modes(k, 1).imag(),
                                    d.output_modes(k, 1).real(), d.output_modes(k, 1).imag()});
    const std::string tag = detail::safe_label(mode_pts[m].label);
    out.tables.push_back({"schmidt_modes_" + tag + ".csv", "first two Schmidt mode pairs", modes});
    auto& mm = out.metrics["modes"][mode_pts[m].label];
    mm["gamma_P_l_over_pi"] = c.modes_at_gamma_P_l_over_pi;
    mm["lambda1"] = d.coefficients[0];
    mm["lambda2"] = d.coefficients[1];
    mm["rms_duration_u1_ps"] = rms_duration(d.input_mode(0));
  }
  return out;
}

inline StudyResult run_inputs(const ScenarioConfig& c, int workers) {
  const auto pts = expand_points(c);
  std::map<std::string, SampledField> electronic;
  for (const auto& p : pts)
    if (!electronic.count(p.label)) electronic.emplace(p.label, electronic_schmidt_input(make_input_setup(p.config)));
  const auto rows = parallel_map<std::vector<InputOutcome>>(static_cast<int>(pts.size()), workers, [&](int k) {
    const auto& pc = pts[k].config;
    return compare_inputs(make_input_setup(pc), pc.Omega(), electronic.at(pts[k].label));
  });
  StudyResult out;
  std::vector<std::string> header = {"case (label)", "Omega_THz (THz)"};
  for (const auto& o : rows.front()) header.push_back("g2_click_" + o.label + " (1)");
  for (const auto& o : rows.front()) header.push_back("conversion_" + o.label + " (1)");
  header.push_back("ordering_holds (bool)");
  CsvTable t(header);
  bool all = true;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    std::vector<std::string> row = {pts[k].label, format_number(pts[k].config.Omega_THz)};
    for (const auto& o : rows[k]) row.push_back(format_number(o.g2_click));
    for (const auto& o : rows[k]) row.push_back(format_number(o.conversion));
    const bool ok = ordering_holds(rows[k]);
    all = all && ok;
    row.push_back(ok ? "1" : "0");
    t.row(row);
  }
  out.tables.push_back({"input_comparison.csv",
                        "g2_click and conversion probability (windowed, filtered Integral |psi_out|^2) per input", t});
  out.metrics["ordering_holds_everywhere"] = all;
  return out;
}

inline StudyResult run_single(const ScenarioConfig& c, int workers) {
  (void)workers;
  StudyResult out;
  for (const auto& p : expand_points(c)) {
    const auto& pc = p.config;
    const TimeGrid g = make_grid(pc);
    const auto f = make_filter(pc);
    SampledField psi_out;
    ComplexMatrix E;
    if (pc.mode == RunMode::CW) {
      const auto [s, r] = make_cw(pc);
      psi_out = filtered_psi_out(s, r, detail::photon_for(pc, g, nullptr, nullptr), f);
      E = f.is_all_pass() ? ComplexMatrix::Zero(g.size(), g.size())
                          : phonon_expectation_cw(s, r, f, g, pc.omega_intervals, pc.z_intervals);
    } else {
      const auto s = make_pulsed(pc);
      const auto r = s.fiber.silica_response();
      GreenPropagator prop(s.fiber, r, s.initial_pumps(g), make_propagation(pc));
      const ComplexMatrix G = prop.propagate_signal_inputs().first;
      psi_out = pulsed_psi_out(G, detail::photon_for(pc, g, &G, &s), f);
      PulsedNoiseOptions opt;
      opt.z_stride = pc.z_stride;
      E = pulsed_phonon_expectation(prop, r, pc.T, f, opt);
    }
    const auto m = windowed_moments(psi_out, E, pc.window);
    if (!(m.flux() > 0.0)) throw NumericalError("statistics", "windowed flux is zero");
    const RealMatrix g2 = g2_matrix(psi_out, E);
    CsvTable t({"t (ps)", "psi_out_re (ps^-1/2)", "psi_out_im (ps^-1/2)", "noise_E_tt (1/ps)", "I_out (1/ps)",
                "g2_zero_delay (1)"});
    for (int k = 0; k < g.size(); ++k)
      t.row(std::vector<double>{g.t(k), psi_out.values[k].real(), psi_out.values[k].imag(), E(k, k).real(),
                                std::norm(psi_out.values[k]) + E(k, k).real(), g2(k, k)});
    const std::string tag = c.cases.empty() ? "" : "_" + detail::safe_label(p.label);
    out.tables.push_back({"output" + tag + ".csv", "filtered output photon amplitude and noise", t});
    auto& mm = out.metrics[p.label];
    mm["g2_click"] = m.numerator / (m.flux() * m.flux());
    mm["conversion"] = m.photon;
    mm["noise_photons"] = m.noise;
  }
  return out;
}

inline StudyResult run_study(const ScenarioConfig& c, int workers) {
  switch (c.study) {
    case Study::Flux: return run_flux(c, workers);
    case Study::G2Map: return run_g2_map(c, workers);
    case Study::G2Click: return run_g2_click(c, workers);
    case Study::Green: return run_green(c, workers);
    case Study::Schmidt: return run_schmidt(c, workers);
    case Study::Inputs: return run_inputs(c, workers);
    case Study::Single: return run_single(c, workers);
  }
  throw ConfigError("unknown study");
}

inline nlohmann::json provenance(const ScenarioConfig& c) {
  return {{"name", c.name},
          {"study", to_string(c.study)},
          {"mode", c.mode == RunMode::CW ? "cw" : "pulsed"},
          {"schema_version", kSchemaVersion},
          {"code_version", FWMBS_VERSION},
          {"grid", {{"n", c.grid_n}, {"dt_ps", c.grid_dt}, {"span_ps", c.grid_n * c.grid_dt}}},
          {"steps", c.steps},
          {"raman_iterations", c.raman_iterations},
          {"config", to_json(c)}};
}

/// Runs the study and writes its CSVs, results.json and manifest.json into `dir`.
inline nlohmann::json run_scenario(const ScenarioConfig& c, const std::string& dir, int workers) {
  ArtifactWriter w(dir, config_hash(c));
  const auto res = run_study(c, workers);
  for (const auto& t : res.tables) w.csv(t.name, t.table, t.description);
  nlohmann::json doc = provenance(c);
  doc["metrics"] = res.metrics;
  w.json("results.json", doc, "scalar metrics and provenance");
  w.manifest({{"name", c.name}});
  return doc;
}

/// Step-halving convergence study of a pulsed config.
inline std::pair<ConvergenceReport, nlohmann::json> run_convergence(const ScenarioConfig& c, int levels,
                                                                   const std::string& dir) {
  if (c.mode != RunMode::Pulsed) throw ConfigError("converge requires mode: pulsed");
  ArtifactWriter w(dir, config_hash(c));
  const auto rep = convergence_study(make_pulsed(c), make_grid(c), make_propagation(c), levels, c.convergence_band);
  CsvTable t({"level (1)", "steps (1)", "h (m)", "difference to next level (1)", "order (1)"});
  const double len = make_pulsed(c).fiber.length;
  for (std::size_t m = 0; m < rep.steps.size(); ++m)
    t.row(std::vector<double>{static_cast<double>(m), static_cast<double>(rep.steps[m]), len / rep.steps[m],
                              m < rep.differences.size() ? rep.differences[m] : std::nan(""),
                              m < rep.orders.size() ? rep.orders[m] : std::nan("")});
  w.csv("convergence.csv", t, "band-limited operator differences under step halving");
  nlohmann::json doc = provenance(c);
  doc["metrics"] = {{"orders", rep.orders},
                    {"min_order", rep.min_order},
                    {"monotone", rep.monotone},
                    {"pass", rep.pass},
                    {"single_raman_iteration_orders", rep.single_iteration_orders},
                    {"grid_doubling_change", rep.grid_change},
                    {"grid_resolved", rep.grid_resolved}};
  w.json("results.json", doc, "convergence report");
  w.manifest({{"name", c.name}});
  return {rep, doc};
}

/// Flat-pump run against the CW Green functions.
inline std::pair<OracleReport, nlohmann::json> run_oracle(const ScenarioConfig& c, const std::string& dir) {
  if (c.mode != RunMode::Pulsed) throw ConfigError("oracle requires mode: pulsed");
  ArtifactWriter w(dir, config_hash(c));
  const auto rep = cw_oracle(make_pulsed(c), make_grid(c), make_propagation(c));
  nlohmann::json doc = provenance(c);
  doc["metrics"] = {{"max_relative_deviation", rep.deviation}, {"threshold", rep.threshold}, {"pass", rep.pass}};
  w.json("results.json", doc, "CW oracle report");
  w.manifest({{"name", c.name}});
  return {rep, doc};
}

}  // namespace fwmbs
