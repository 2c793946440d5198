// fwmbs: run declarative scenarios, convergence studies and the CW oracle.
// Exit codes: 0 ok, 2 config error, 3 numerical failure.

#include "fwmbs/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(FWMBS_PRESET_DIR, ec))
    if (e.path().extension() == ".yaml") names.push_back(e.path().stem().string());
  std::sort(names.begin(), names.end());
  return names;
}

std::string output_dir(const fwmbs::ScenarioConfig& c, const std::string& override_dir) {
  return override_dir.empty() ? c.output_directory : override_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency conversion by four-wave mixing Bragg scattering with Raman noise"};
  app.set_version_flag("--version", FWMBS_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir, preset;
  int levels = 3;

  auto* run = app.add_subcommand("run", "run the study of a config");
  run->add_option("config", config_path, "scenario YAML")->required();
  run->add_option("--out", out_dir, "output directory (overrides outputs.directory)");

  auto* conv = app.add_subcommand("converge", "step-halving convergence of a pulsed config");
  conv->add_option("config", config_path, "scenario YAML")->required();
  conv->add_option("--levels", levels, "number of step levels (>= 2)")->check(CLI::Range(2, 12));
  conv->add_option("--out", out_dir, "output directory");

  auto* orc = app.add_subcommand("oracle", "compare a flat-pump pulsed run with the CW Green functions");
  orc->add_option("config", config_path, "scenario YAML")->required();
  orc->add_option("--out", out_dir, "output directory");

  auto* presets = app.add_subcommand("presets", "list or print the bundled presets");
  presets->require_subcommand(1);
  auto* plist = presets->add_subcommand("list", "list preset names");
  auto* pemit = presets->add_subcommand("emit", "print a preset to stdout");
  pemit->add_option("name", preset, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (plist->parsed()) {
      for (const auto& n : preset_names()) std::cout << n << '\n';
      return kOk;
    }
    if (pemit->parsed()) {
      std::ifstream in(std::filesystem::path(FWMBS_PRESET_DIR) / (preset + ".yaml"));
      if (!in) throw fwmbs::ConfigError("unknown preset '" + preset + "'");
      std::cout << in.rdbuf();
      return kOk;
    }

    const auto cfg = fwmbs::load_config(config_path);
    const auto dir = output_dir(cfg, out_dir);
    if (run->parsed()) {
      const auto doc = fwmbs::run_scenario(cfg, dir, fwmbs::worker_count());
      std::cout << doc["metrics"].dump(2) << '\n' << "wrote " << dir << '\n';
      return kOk;
    }
    if (conv->parsed()) {
      const auto [rep, doc] = fwmbs::run_convergence(cfg, levels, dir);
      std::cout << doc["metrics"].dump(2) << '\n';
      return rep.pass ? kOk : kNumericalFailure;
    }
    if (orc->parsed()) {
      const auto [rep, doc] = fwmbs::run_oracle(cfg, dir);
      std::cout << doc["metrics"].dump(2) << '\n';
      return rep.pass ? kOk : kNumericalFailure;
    }
  } catch (const fwmbs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}
