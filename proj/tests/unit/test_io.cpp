#include <catch_amalgamated.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "frohlich/io/cli.hpp"
#include "frohlich/io/config_parser.hpp"
#include "frohlich/io/csv.hpp"
#include "frohlich/io/manifest.hpp"
#include "frohlich/io/presets.hpp"

using namespace frohlich;
using namespace frohlich::io;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const char* minimal = R"(
[array]
n_membranes = 3
omega0 = 1e6 rad/s
coupling_ratio = 0.1 omega0^2

[cavity]
kappa = 1e5 rad/s
detuning = -1 band
g0 = 1 rad/s

[drive]
alpha_magnitude = 2

[bath]
gamma = 0.1 rad/s
temperature = 300 mK
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto p = text.find(from);
  REQUIRE(p != std::string::npos);
  return text.replace(p, from.size(), to);
}

int error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string error_message(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto d = fs::temp_directory_path() /
                 ("frohlich-test-" + std::to_string(::getpid()) + "-" + tag + "-" + std::to_string(counter++));
  fs::remove_all(d);
  return d;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "frohlich");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

json read_manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST_CASE("minimal configuration parses with units resolved") {
  const auto pc = parse_config_text(minimal);
  const auto& c = pc.system;
  CHECK(c.n_membranes == 3);
  CHECK(c.omega0 == 1e6);
  CHECK(c.coupling_ratio == Approx(1e11));
  CHECK(c.kappa == 1e5);
  CHECK(c.detuning == Approx(-1e5));
  CHECK(c.temperature == Approx(0.3));
  CHECK(std::get<AlphaMagnitude>(*c.drive).value == 2.0);
  CHECK(c.gamma.value() == 0.1);
}

TEST_CASE("frequency, mass and power units convert to SI") {
  auto t = replace(minimal, "omega0 = 1e6 rad/s", "omega0 = 134 kHz\nmass = 40 ng");
  t = replace(t, "kappa = 1e5 rad/s", "kappa = 2 MHz");
  t = replace(t, "detuning = -1 band", "detuning = -0.5 kappa");
  t = replace(t, "g0 = 1 rad/s", "big_g = 15 MHz/nm^2");
  t = replace(t, "alpha_magnitude = 2", "input_power = 5 uW\nwavelength = 1064 nm");
  t = replace(t, "gamma = 0.1 rad/s", "quality_factor = 1.2e7");
  t = replace(t, "temperature = 300 mK", "temperature = 300 mK\npump_rate = 2 gamma");
  const auto pc = parse_config_text(t);
  const auto& c = pc.system;
  const double w0 = 2 * constants::pi * 134e3;
  CHECK(c.omega0 == Approx(w0));
  CHECK(c.mass.value() == Approx(40e-12));
  CHECK(c.kappa == Approx(2 * constants::pi * 2e6));
  CHECK(c.detuning == Approx(-0.5 * c.kappa));
  CHECK(c.big_g.value() == Approx(2 * constants::pi * 15e6 * 1e18));
  CHECK(c.coupling_ratio == Approx(0.1 * w0 * w0));
  const auto& p = std::get<InputPower>(*c.drive);
  CHECK(p.watts == Approx(5e-6));
  CHECK(p.wavelength == Approx(1064e-9));
  CHECK(pc.wavelength.value() == Approx(1064e-9));
  CHECK(c.quality_factor.value() == 1.2e7);
  CHECK(c.pump_rate == Approx(2 * w0 / 1.2e7));
}

TEST_CASE("unknown keys are reported with their line") {
  const auto t = replace(minimal, "n_membranes = 3", "n_membranes = 3\nspring = 4");
  CHECK(error_line(t) == 4);
  CHECK_THAT(error_message(t), Catch::Matchers::ContainsSubstring("unknown key 'spring'"));
  CHECK_THAT(error_message(t), Catch::Matchers::ContainsSubstring("<config>:4"));
}

TEST_CASE("missing required keys are reported with the section line") {
  const auto t = replace(minimal, "kappa = 1e5 rad/s\n", "");
  CHECK(error_line(t) == 7);
  CHECK_THAT(error_message(t), Catch::Matchers::ContainsSubstring("missing required key 'kappa'"));
}

TEST_CASE("unit mismatches are reported with their line") {
  const auto t = replace(minimal, "temperature = 300 mK", "temperature = 300 Hz");
  CHECK(error_line(t) == 17);
  CHECK_THAT(error_message(t), Catch::Matchers::ContainsSubstring("temperature"));
  CHECK(error_line(replace(minimal, "omega0 = 1e6 rad/s", "omega0 = 1e6")) == 4);
  CHECK(error_line(replace(minimal, "kappa = 1e5 rad/s", "kappa = 1e5 furlongs")) == 8);
}

TEST_CASE("empty drive section names the accepted drive forms") {
  const auto t = replace(minimal, "alpha_magnitude = 2", "");
  const auto msg = error_message(t);
  CHECK(error_line(t) == 12);
  CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("alpha_magnitude"));
  CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("drive_strength"));
  CHECK_THAT(msg, Catch::Matchers::ContainsSubstring("input_power"));
}

TEST_CASE("structural mistakes are rejected") {
  CHECK(error_line(replace(minimal, "[bath]", "[bath]\n[bath]")) == 16);
  CHECK(error_line(replace(minimal, "[bath]", "[baths]")) == 15);
  CHECK(error_line(replace(minimal, "gamma = 0.1 rad/s", "gamma = 0.1 rad/s\ngamma = 0.2 rad/s")) == 17);
  CHECK(error_line(replace(minimal, "alpha_magnitude = 2", "alpha_magnitude = 2\ndrive_strength = 1 rad/s")) == 14);
  CHECK(error_line(replace(minimal, "temperature = 300 mK", "temperature = 300 mK\nkappa = 1 rad/s")) == 18);
  CHECK(error_line(replace(minimal, "n_membranes = 3", "n_membranes = three")) == 3);
  CHECK_THROWS_AS(parse_config("/nonexistent/frohlich.ini"), ValidationError);
}

TEST_CASE("shipped configs match the embedded presets") {
  for (const auto& p : presets()) {
    INFO(p.name);
    const fs::path file = fs::path(FROHLICH_PRESET_DIR) / (std::string(p.name) + ".ini");
    REQUIRE(fs::exists(file));
    CHECK(slurp(file) == p.text);
    const auto a = load_preset(p.name);
    const auto b = parse_config(file.string());
    CHECK(parameter_hash(to_json(a.system)) == parameter_hash(to_json(b.system)));
  }
  CHECK_THROWS_AS(find_preset("fig99"), ValidationError);
}

TEST_CASE("band preset carries the five-membrane parameters") {
  const auto c = load_preset("fig4").system;
  CHECK(c.n_membranes == 5);
  CHECK(c.omega0 == 1e6);
  CHECK(c.kappa == 1e5);
  CHECK(c.gamma.value() == 0.1);
  CHECK(c.temperature == Approx(0.3));
  CHECK(c.coupling_ratio == Approx(0.1 * c.omega0 * c.omega0));
  CHECK(c.detuning == Approx(-1e5));
  CHECK(coupling_product(c) == Approx(5e-5 * c.kappa));
}

TEST_CASE("pair preset reproduces its thermal occupations") {
  auto c = load_preset("fig7").system;
  const auto s = build_mode_system(c);
  CHECK(s.thermal[0] == Approx(1.15).margin(0.01));
  CHECK(s.thermal[1] == Approx(0.71).margin(0.01));
}

TEST_CASE("parameter hash ignores key order and sees every change") {
  const auto base = parse_config_text(minimal);
  const auto reordered = parse_config_text(replace(
      minimal, "n_membranes = 3\nomega0 = 1e6 rad/s", "omega0 = 1e6 rad/s\nn_membranes = 3"));
  CHECK(parameter_hash(to_json(base.system)) == parameter_hash(to_json(reordered.system)));
  json a{{"b", 1}, {"a", 2}}, b{{"a", 2}, {"b", 1}};
  CHECK(parameter_hash(a) == parameter_hash(b));

  const std::vector<std::pair<std::string, std::string>> edits{
      {"n_membranes = 3", "n_membranes = 4"},     {"omega0 = 1e6 rad/s", "omega0 = 1.1e6 rad/s"},
      {"kappa = 1e5 rad/s", "kappa = 2e5 rad/s"}, {"alpha_magnitude = 2", "alpha_magnitude = 3"},
      {"gamma = 0.1 rad/s", "gamma = 0.2 rad/s"}, {"temperature = 300 mK", "temperature = 301 mK"},
      {"g0 = 1 rad/s", "g0 = 1 rad/s\nn_cavities = 3"}};
  std::vector<std::string> hashes{parameter_hash(to_json(base.system))};
  for (const auto& [from, to] : edits) {
    const auto pc = parse_config_text(replace(minimal, from, to));
    const auto h = parameter_hash(to_json(pc.system));
    for (const auto& other : hashes) CHECK(h != other);
    hashes.push_back(h);
  }
  const auto tol = parse_config_text(std::string(minimal) + "\n[numerics]\nrtol = 1e-6\n");
  CHECK(parameter_hash(to_json(tol.run)) != parameter_hash(to_json(base.run)));
}

TEST_CASE("run directory refuses to overwrite without force") {
  const auto dir = scratch_dir("rundir");
  RunManifest m;
  m.command = "steady";
  m.parameters = {{"x", 1}};
  {
    RunDirectory rd(dir, m, {"a.csv"}, false);
    CHECK(read_manifest(dir)["status"] == "running");
    rd.write("a.csv", "x\n1\n");
    rd.finish("ok");
  }
  const auto j = read_manifest(dir);
  CHECK(j["status"] == "ok");
  CHECK(j["outputs"] == json::array({"a.csv"}));
  CHECK(j["config_hash"] == parameter_hash(m.parameters));
  CHECK_THROWS_AS(RunDirectory(dir, m, {"a.csv"}, false), OutputConflict);
  CHECK_NOTHROW(RunDirectory(dir, m, {"a.csv"}, true));
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
  fs::remove_all(dir);
}

TEST_CASE("csv writer quotes text and leaves missing numbers empty") {
  CsvWriter w({"name", "value"});
  w.cell(std::string("a,b")).cell(std::nan("")).end_row();
  w.cell(std::string("plain")).cell(0.5).end_row();
  CHECK(w.str() == "name,value\n\"a,b\",\nplain,0.5\n");
  CHECK(mode_columns("n", 3) == std::vector<std::string>{"n1", "n2", "n3"});
}

TEST_CASE("grid specifications parse") {
  const auto a = parse_grid("g0_alpha=1:100:3,log");
  CHECK(a.logarithmic);
  REQUIRE(a.values.size() == 3);
  CHECK(a.values[0] == 1.0);
  CHECK(a.values[1] == Approx(10.0));
  CHECK(a.values[2] == 100.0);
  const auto b = parse_grid("temperature=0.1:0.3:3");
  CHECK_FALSE(b.logarithmic);
  CHECK(b.values[1] == Approx(0.2));
  CHECK_THROWS_AS(parse_grid("temperature=0.1:0.3"), ValidationError);
  CHECK_THROWS_AS(parse_grid("colour=1:2:3"), ValidationError);
  CHECK_THROWS_AS(parse_grid("temperature=0.1:0.3:3,cubic"), ValidationError);
  CHECK_THROWS_AS(parse_grid("temperature=a:0.3:3"), ValidationError);
}

TEST_CASE("steady on the band preset concentrates phonons in the lowest mode") {
  const auto dir = scratch_dir("steady");
  const auto r = cli({"steady", "--preset", "fig4", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const auto j = read_manifest(dir);
  CHECK(j["status"] == "ok");
  CHECK(j["source"] == "preset:fig4");
  CHECK(j["summary"]["target_mode"] == 1);
  CHECK(j["summary"]["fraction"].get<double>() > j["summary"]["baseline"].get<double>());
  CHECK(fs::exists(dir / "steady.csv"));
  fs::remove_all(dir);
}

TEST_CASE("cli exit codes distinguish failure kinds") {
  const auto dir = scratch_dir("codes");
  CHECK(cli({}).code == exit_usage);
  CHECK(cli({"steady", "--bogus"}).code == exit_usage);
  CHECK(cli({"steady", "--preset", "fig4", "--config", "x.ini", "--out", dir.string()}).code == exit_usage);
  CHECK(cli({"steady", "--preset", "nope", "--out", dir.string()}).code == exit_validation);
  CHECK(cli({"steady", "--config", "/nonexistent.ini", "--out", dir.string()}).code == exit_validation);
  CHECK(cli({"steady", "--out", dir.string()}).code == exit_validation);
  CHECK(cli({"mcwf", "--preset", "fig7", "--out", dir.string()}).code == exit_usage);

  CHECK(cli({"steady", "--preset", "fig4", "--out", dir.string()}).code == exit_ok);
  const auto again = cli({"steady", "--preset", "fig4", "--out", dir.string()});
  CHECK(again.code == exit_output_conflict);
  CHECK_THAT(again.err, Catch::Matchers::ContainsSubstring("--force"));
  CHECK(cli({"steady", "--preset", "fig4", "--out", dir.string(), "--force"}).code == exit_ok);
  fs::remove_all(dir);
}

TEST_CASE("a run that fails after starting leaves a failed manifest") {
  const auto dir = scratch_dir("failed");
  CHECK(cli({"critical", "--preset", "fig4", "--target", "1.5", "--out", dir.string()}).code == exit_validation);
  CHECK(read_manifest(dir)["status"] == "failed");
  fs::remove_all(dir);
}

TEST_CASE("partial scans keep their output and exit with the solver code") {
  const auto dir = scratch_dir("scan");
  const auto r = cli({"scan", "--preset", "fig4", "--grid", "detuning=-2e5:2e6:6", "--out", dir.string()});
  CHECK(r.code == exit_solver);
  const auto j = read_manifest(dir);
  CHECK(j["status"] == "partial");
  const auto csv = slurp(dir / "scan.csv");
  CHECK_THAT(csv, Catch::Matchers::ContainsSubstring("runaway"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  fs::remove_all(dir);
}

TEST_CASE("two-dimensional scan writes contours") {
  const auto dir = scratch_dir("contour");
  const auto r = cli({"scan", "--preset", "fig4", "--grid", "g0_alpha=0.5:20:6,log", "--grid",
                      "temperature=0.1:1:4", "--contour", "0.9", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const auto text = slurp(dir / "contours.txt");
  CHECK_THAT(text, Catch::Matchers::ContainsSubstring("# level 0.9"));
  CHECK(read_manifest(dir)["outputs"].size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("mcwf output is byte-identical for the same seed") {
  const auto d1 = scratch_dir("mcwf"), d2 = scratch_dir("mcwf"), d3 = scratch_dir("mcwf");
  const std::vector<std::string> common{"mcwf",      "--preset",  "fig7", "--traj", "40", "--t-end",
                                        "0.01",      "--samples", "6"};
  auto with = [&](const fs::path& d, const std::string& seed) {
    auto a = common;
    a.insert(a.end(), {"--seed", seed, "--out", d.string()});
    return cli(a);
  };
  REQUIRE(with(d1, "11").code == exit_ok);
  REQUIRE(with(d2, "11").code == exit_ok);
  REQUIRE(with(d3, "12").code == exit_ok);
  CHECK(slurp(d1 / "mcwf.csv") == slurp(d2 / "mcwf.csv"));
  CHECK(slurp(d1 / "mcwf.csv") != slurp(d3 / "mcwf.csv"));
  CHECK(read_manifest(d1)["config_hash"] == read_manifest(d2)["config_hash"]);
  CHECK(read_manifest(d1)["seed"] == 11);
  for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
}

TEST_CASE("compare emits a per-mode discrepancy table") {
  const auto dir = scratch_dir("compare");
  const auto r = cli({"compare", "--preset", "fig3-desk", "--seed", "5", "--traj", "40", "--t-end", "0.05",
                      "--window-start", "0.02", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const auto csv = slurp(dir / "compare.csv");
  CHECK(csv.rfind("mode,n_mcwf,se_mcwf,n_decorrelated,D,n_exact\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK_THAT(r.out, Catch::Matchers::ContainsSubstring("D_i ="));
  fs::remove_all(dir);
}

TEST_CASE("feasibility on the first membrane design reports microwatts") {
  const auto dir = scratch_dir("feas");
  REQUIRE(cli({"feasibility", "--preset", "table1-row1", "--out", dir.string()}).code == exit_ok);
  const auto j = read_manifest(dir);
  const double p = j["summary"]["input_power"].get<double>();
  CHECK(p > 2.5e-6);
  CHECK(p < 1e-5);
  CHECK(j["summary"]["validity"].contains("violations"));
  fs::remove_all(dir);
}
