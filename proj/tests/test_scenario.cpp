#include "fwmbs/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace fwmbs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fwmbs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig parse(const std::string& text) { return parse_config(YAML::Load(text), "test.yaml"); }

// Expects a ConfigError whose message contains `needle`.
void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse(text);
    FAIL() << "no error for:\n" << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

const std::string kFlux = R"(schema_version: 1
name: flux_small
mode: cw
study: flux
fiber: {gamma: 1.0e-3, P0: 1.0, T: 300}
sweep: {parameter: gamma_P0_l, start: 0.1, stop: 1.2, count: 6}
cases:
  - {label: stokes, f_R: 0.18, Omega_THz: -17}
  - {label: anti_stokes, f_R: 0.18, Omega_THz: 17}
)";

const std::string kSingleCw = R"(schema_version: 1
mode: cw
study: single
fiber: {gamma: 1.0e-3, P0: 1.0, f_R: 0.18, Omega_THz: 17, length_rule: optimal}
photon: {kind: gaussian, tau: 0.1}
grid: {n: 256, dt: 0.02}
numerics: {omega_intervals: 400, z_intervals: 16}
)";

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FWMBS_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

// ------------------------------------------------------------------ parsing

TEST(Config, MinimalDocumentUsesDefaults) {
  const auto c = parse("schema_version: 1\nmode: cw\nstudy: single\n");
  EXPECT_EQ(c.mode, RunMode::CW);
  EXPECT_EQ(c.study, Study::Single);
  EXPECT_DOUBLE_EQ(c.filter_width, 20.0);
  EXPECT_DOUBLE_EQ(c.window, 10.0);
  EXPECT_FALSE(c.sweep);
}

TEST(Config, UnknownTopLevelKeyReportsLine) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ntemprature: 4\n", "test.yaml:4: unknown key 'temprature'");
}

TEST(Config, UnknownNestedKeyReportsPath) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber:\n  gamma: 1\n  fR: 0.1\n",
                      "test.yaml:6: unknown key 'fiber.fR'");
}

TEST(Config, UnknownCaseKeyIsAnError) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ncases:\n  - {label: a, omega: 3}\n",
                      "unknown key 'cases[0].omega'");
}

TEST(Config, SchemaVersionIsRequiredAndChecked) {
  expect_config_error("mode: cw\nstudy: single\n", "schema_version");
  expect_config_error("schema_version: 2\nmode: cw\nstudy: single\n", "unsupported schema_version 2");
}

TEST(Config, TypeErrorsNameTheKey) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber: {T: warm}\n", "'fiber.T' must be a number");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ngrid: {n: 1.5}\n", "'grid.n' must be an integer");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber: [1, 2]\n", "'fiber' must be a mapping");
}

TEST(Config, RejectsOutOfRangeValues) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber: {f_R: 1.5}\n", "f_R");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber: {gamma: -1}\n", "gamma");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nfiber: {T: .nan}\n", "finite");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ndetector: {window: 0}\n", "window");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ncases:\n  - {label: a, T: -3}\n", "T");
}

TEST(Config, EmptySweepRangeIsAnError) {
  expect_config_error(
      "schema_version: 1\nmode: cw\nstudy: flux\nsweep: {parameter: gamma_P0_l, start: 0, stop: 1, count: 0}\n",
      "empty sweep range");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: flux\nsweep: {parameter: gamma_P0_l, values: []}\n",
                      "nonempty");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: flux\nsweep: {parameter: warp, values: [1]}\n",
                      "unknown sweep parameter 'warp'");
}

TEST(Config, StudyMustMatchMode) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: schmidt\n", "requires mode: pulsed");
  expect_config_error("schema_version: 1\nmode: pulsed\nstudy: flux\n", "requires mode: cw");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\nphoton: {kind: schmidt}\n", "requires mode: pulsed");
  expect_config_error("schema_version: 1\nmode: sideways\nstudy: single\n", "mode must be");
  expect_config_error("schema_version: 1\nmode: cw\nstudy: dance\n", "unknown study 'dance'");
}

TEST(Config, DuplicateCaseLabelsAreRejected) {
  expect_config_error("schema_version: 1\nmode: cw\nstudy: single\ncases:\n  - {label: a}\n  - {label: a}\n",
                      "duplicate case label");
}

TEST(Config, SyntaxErrorsCarryLineNumbers) {
  const fs::path dir = scratch("syntax");
  std::ofstream(dir / "bad.yaml") << "schema_version: 1\nmode: cw\nfiber: {gamma: 1\n";
  try {
    load_config((dir / "bad.yaml").string());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.yaml:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_config((dir / "missing.yaml").string()), ConfigError);
}

TEST(Config, AllPresetsParse) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(FWMBS_PRESET_DIR)) {
    if (e.path().extension() != ".yaml") continue;
    ++count;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
  }
  EXPECT_GE(count, 6);
}

TEST(Config, SweepRangeIsInclusiveLinspace) {
  const auto c = parse(kFlux);
  ASSERT_TRUE(c.sweep);
  ASSERT_EQ(c.sweep->values.size(), 6u);
  EXPECT_DOUBLE_EQ(c.sweep->values.front(), 0.1);
  EXPECT_DOUBLE_EQ(c.sweep->values.back(), 1.2);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = parse(kFlux), b = parse(kFlux);
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  auto c = a;
  c.T = 77.0;
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, ExpandPointsOrdersCasesThenSweep) {
  const auto pts = expand_points(parse(kFlux));
  ASSERT_EQ(pts.size(), 12u);
  EXPECT_EQ(pts[0].label, "stokes");
  EXPECT_EQ(pts[6].label, "anti_stokes");
  EXPECT_DOUBLE_EQ(*pts[7].x, pts[7].config.gamma_P0_l.value());
  EXPECT_DOUBLE_EQ(pts[0].config.Omega_THz, -17.0);
  EXPECT_DOUBLE_EQ(pts[6].config.Omega_THz, 17.0);
}

TEST(Config, SetParameterRejectsBadValues) {
  ScenarioConfig c;
  EXPECT_THROW(set_parameter(c, "T", std::nan("")), ConfigError);
  EXPECT_THROW(set_parameter(c, "steps", 2.5), ConfigError);
  EXPECT_THROW(set_parameter(c, "nope", 1.0), ConfigError);
  set_parameter(c, "gamma_P_l_over_pi", 3.0);
  EXPECT_DOUBLE_EQ(c.gamma_P_l_over_pi, 3.0);
}

// ------------------------------------------------------------- execution

TEST(Execution, ParallelMapKeepsOrderAndRethrows) {
  const auto v = parallel_map<int>(20, 4, [](int k) { return k * k; });
  for (int k = 0; k < 20; ++k) EXPECT_EQ(v[k], k * k);
  EXPECT_THROW(parallel_map<int>(5, 3,
                                 [](int k) {
                                   if (k == 3) throw NumericalError("test", "boom");
                                   return k;
                                 }),
               NumericalError);
}

TEST(Execution, WorkerCountFromEnvironment) {
  setenv("FWMBS_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(), 3);
  setenv("FWMBS_WORKERS", "zero", 1);
  EXPECT_THROW(worker_count(), ConfigError);
  unsetenv("FWMBS_WORKERS");
  EXPECT_GE(worker_count(), 1);
}

TEST(Execution, PhotonFileIsInterpolated) {
  const fs::path dir = scratch("photon");
  std::ofstream(dir / "p.csv") << "# shape\nt (ps),re (ps^-1/2),im (ps^-1/2)\n-1,0,0\n0,2,-2\n1,0,0\n";
  const TimeGrid g(64, 0.1);
  const auto f = load_photon_csv((dir / "p.csv").string(), g);
  EXPECT_NEAR(f.values[g.index_of(0.0)].real(), 2.0, 1e-12);
  EXPECT_NEAR(f.values[g.index_of(0.5)].imag(), -1.0, 1e-12);
  EXPECT_EQ(f.values[g.index_of(-2.0)], cdouble(0.0));
  std::ofstream(dir / "bad.csv") << "t,re,im\n0,1\n";
  EXPECT_THROW(load_photon_csv((dir / "bad.csv").string(), g), ConfigError);
}

TEST(Execution, FluxRunIsDeterministicAcrossWorkerCounts) {
  const auto c = parse(kFlux);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_scenario(c, a.string(), 1);
  run_scenario(c, b.string(), 3);
  for (const char* f : {"relative_flux.csv", "results.json", "manifest.json"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Execution, StokesGainsAndAntiStokesDepletes) {
  const auto doc = run_scenario(parse(kFlux), scratch("flux").string(), 1);
  EXPECT_GT(doc["metrics"]["peak_relative_flux"]["stokes"].get<double>(), 1.0);
  EXPECT_LT(doc["metrics"]["peak_relative_flux"]["anti_stokes"].get<double>(), 1.0);
}

TEST(Execution, ManifestListsEveryFileAndFilesCarryTheHash) {
  const auto c = parse(kSingleCw);
  const fs::path dir = scratch("manifest");
  run_scenario(c, dir.string(), 1);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const std::string hash = config_hash(c);
  EXPECT_EQ(manifest["config_hash"], hash);
  std::set<std::string> listed;
  for (const auto& f : manifest["files"]) listed.insert(f["path"].get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
  EXPECT_EQ(listed, present);
  const std::regex unit_cell(R"([^,()]+ \([^()]+\))");
  for (const auto& name : present) {
    const std::string text = slurp(dir / name);
    EXPECT_NE(text.find(hash), std::string::npos) << name;
    if (fs::path(name).extension() == ".csv") {
      std::istringstream in(text);
      std::string first, header;
      std::getline(in, first);
      std::getline(in, header);
      EXPECT_EQ(first, "# config_hash: " + hash);
      std::stringstream cells(header);
      for (std::string cell; std::getline(cells, cell, ',');) EXPECT_TRUE(std::regex_match(cell, unit_cell)) << cell;
    }
  }
  const auto results = nlohmann::json::parse(slurp(dir / "results.json"));
  EXPECT_EQ(results["code_version"], FWMBS_VERSION);
  EXPECT_EQ(results["grid"]["n"], 256);
  const double g2 = results["metrics"]["base"]["g2_click"].get<double>();
  EXPECT_GT(g2, 0.0);
  EXPECT_LT(g2, 1.5);
}

TEST(Execution, WritingAFileTwiceIsRejected) {
  ArtifactWriter w(scratch("twice"), "0");
  CsvTable t({"x (1)"});
  t.row(std::vector<double>{1.0});
  w.csv("a.csv", t, "a");
  EXPECT_THROW(w.csv("a.csv", t, "a"), std::logic_error);
  EXPECT_THROW(t.row(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

// -------------------------------------------------------------------- CLI

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "good.yaml") << kSingleCw;
  std::ofstream(dir / "typo.yaml") << kSingleCw << "detectr: {window: 3}\n";
  std::ofstream(dir / "alias.yaml") << kSingleCw << "filter: {width: 20.0, center: 150.0}\n";
  // Too few steps to resolve the walk-off phase: the oracle reports a failure.
  std::ofstream(dir / "coarse.yaml") << "schema_version: 1\nmode: pulsed\nstudy: single\n"
                                        "grid: {n: 128, dt: 0.02}\nnumerics: {steps: 4}\n";
  EXPECT_EQ(run_cli("presets list"), 0);
  EXPECT_EQ(run_cli("presets emit fig2"), 0);
  EXPECT_EQ(run_cli("presets emit fig99"), 2);
  EXPECT_EQ(run_cli("run " + (dir / "good.yaml").string() + " --out " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_EQ(run_cli("run " + (dir / "typo.yaml").string() + " --out " + (dir / "o2").string()), 2);
  EXPECT_EQ(run_cli("run " + (dir / "missing.yaml").string()), 2);
  EXPECT_EQ(run_cli("run " + (dir / "alias.yaml").string() + " --out " + (dir / "o3").string()), 2);
  EXPECT_EQ(run_cli("oracle " + (dir / "coarse.yaml").string() + " --out " + (dir / "o5").string()), 3);
  EXPECT_EQ(run_cli("converge " + (dir / "good.yaml").string() + " --out " + (dir / "o4").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
}
