#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dissipair/commands.hpp"

using namespace dissipair;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("dissipair_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string write_config(const TempDir& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir.path / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::string& command, const std::string& config, const fs::path& out, int threads = 1,
        bool expect_unstable = false) {
  CommandOptions o;
  o.command = command;
  o.config_path = config;
  o.out = out.string();
  o.threads = threads;
  o.expect_unstable = expect_unstable;
  return execute(o);
}

const char* kSsh = R"({"model": {"kind": "ssh", "n": 15, "alpha": -0.4},
  "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": RATIO}})";

std::string ssh_config(const std::string& ratio) {
  std::string s = kSsh;
  s.replace(s.find("RATIO"), 5, ratio);
  return s;
}

}  // namespace

TEST_CASE("config errors exit 4 and write nothing") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  const std::vector<std::string> bad{
      R"({"model": {"kind": "ssh", "n": 15, "alpha": -0.4, "colour": 1}})",
      R"({"model": {"kind": "ssh", "n": 15}, "dissipator": {"cooling": 2, "heating": 0, "eta": 0.1, "eta_ratio": 0.5}})",
      R"({"model": {"kind": "ssh", "n": 15}, "dissipator": {"cooling": 2, "heating": 0, "eta": 0.1}, "bogus": 1})",
      R"({"model": {"kind": "moebius"}})",
      R"({"model": {"kind": "ssh", "n": 15}, "dissipator": {"cooling": 99, "heating": 0, "eta": 0.1}})",
      R"({"model": {"kind": "ssh", "n": 15}, "output": {"formats": ["hdf5"]}})",
      R"({"model": {"kind": "ssh", "n": 15})"};
  for (const auto& text : bad) {
    CAPTURE(text);
    CHECK(run("steady", write_config(dir, "c.json", text), out) == kExitConfig);
    CHECK_FALSE(fs::exists(out));
  }
  // A task-level violation found after parsing still leaves nothing behind.
  const std::string grid = R"({"model": {"kind": "three_mode", "j1": 1, "j2": 1},
    "dissipator": {"cooling": 0, "heating": 2, "eta": 0.1},
    "task": {"axes": [{"name": "eta", "grid": {"start": 0, "stop": 1, "count": 3}}, {"name": "alpha", "grid": [1]}]}})";
  CHECK(run("stability", write_config(dir, "c.json", grid), out) == kExitConfig);
  CHECK_FALSE(fs::exists(out));
  CHECK(run("steady", (dir.path / "missing.json").string(), out) == kExitConfig);
  CHECK(run("no-such-command", write_config(dir, "c.json", ssh_config("0.5")), out) == kExitConfig);
}

TEST_CASE("unstable and non-unique exit codes") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  CHECK(run("steady", write_config(dir, "c.json", ssh_config("1.001")), out) == kExitUnstable);
  CHECK_FALSE(fs::exists(out));
  const std::string dark = R"({"model": {"kind": "ssh", "n": 7, "alpha": 0.0},
    "dissipator": {"cooling": 1, "heating": 3, "eta": 0.1}})";
  CHECK(run("steady", write_config(dir, "d.json", dark), out) == kExitNonUnique);
  CHECK(exit_code_for(ErrorCode::Numerical) == kExitFailure);
}

TEST_CASE("expect-unstable captures the error") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  CHECK(run("steady", write_config(dir, "c.json", ssh_config("1.001")), out, 1, true) == kExitOk);
  const Json summary = Json::parse(slurp(out / "summary.json"));
  CHECK(summary["status"] == "unstable");
  fs::remove_all(out);
  CHECK(run("steady", write_config(dir, "c.json", ssh_config("0.5")), out, 1, true) == kExitFailure);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("steady outputs and sidecars") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  const std::string cfg = R"({"model": {"kind": "ssh", "n": 15, "alpha": -0.4},
    "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": 0.9}, "task": {"correlations": true}, "seed": 7})";
  REQUIRE(run("steady", write_config(dir, "c.json", cfg), out) == kExitOk);
  for (const char* f : {"density.csv", "squeeze.csv", "correlations.csv", "summary.json"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
    const Json meta = Json::parse(slurp(out / (std::string(f) + ".meta.json")));
    CHECK(meta["file"] == f);
    CHECK(meta["seed"] == 7);
    CHECK(meta["version"] == version_string());
    CHECK(meta["config"]["dissipator"]["eta_ratio"] == 0.9);
  }
  const std::string density = slurp(out / "density.csv");
  CHECK(density.rfind("site,x,y,density\n", 0) == 0);
  CHECK(std::count(density.begin(), density.end(), '\n') == 16);
  const Json summary = Json::parse(slurp(out / "summary.json"));
  CHECK(summary["purity"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(summary["eta"].get<double>() == doctest::Approx(0.9 * summary["eta_critical"].get<double>()));
  // Sidecar keys come out sorted.
  const std::string meta = slurp(out / "density.csv.meta.json");
  CHECK(meta.find("\"command\"") < meta.find("\"config\""));
  CHECK(meta.find("\"seed\"") < meta.find("\"version\""));
}

TEST_CASE("mixed-sublattice sites fall back to the Lyapunov solution") {
  TempDir dir;
  const fs::path out = dir.path / "out";
  const std::string cfg = R"({"model": {"kind": "ssh", "n": 6, "alpha": -0.3},
    "dissipator": {"cooling": 1, "heating": 0, "eta": 0.05}})";
  REQUIRE(run("steady", write_config(dir, "c.json", cfg), out) == kExitOk);
  CHECK(Json::parse(slurp(out / "summary.json"))["method"] == "lyapunov");
}

TEST_CASE("identical config and seed give byte-identical output") {
  TempDir dir;
  const std::string cfg = R"({"model": {"kind": "ssh", "n": 12, "alpha": -0.6},
    "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": 0.99},
    "task": {"alphas": [-0.6, 0.6], "sigma_over_alpha": [0.1, 1.0], "realizations": 6}, "seed": 11})";
  const std::string path = write_config(dir, "c.json", cfg);
  REQUIRE(run("disorder", path, dir.path / "a", 1) == kExitOk);
  REQUIRE(run("disorder", path, dir.path / "b", 1) == kExitOk);
  REQUIRE(run("disorder", path, dir.path / "c", 3) == kExitOk);
  for (const char* f : {"disorder.csv", "disorder.csv.meta.json", "crossover.csv"}) {
    CAPTURE(f);
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "c" / f));
  }
  CommandOptions o;
  o.command = "disorder";
  o.config_path = path;
  o.out = (dir.path / "d").string();
  o.seed = 12;
  REQUIRE(execute(o) == kExitOk);
  CHECK(slurp(dir.path / "a" / "disorder.csv") != slurp(dir.path / "d" / "disorder.csv"));
}

TEST_CASE("thread count resolution") {
  CHECK(resolve_threads(3) == 3);
  CHECK_THROWS_AS(resolve_threads(0), Error);
  ::setenv("DISSIPAIR_THREADS", "5", 1);
  CHECK(resolve_threads(std::nullopt) == 5);
  ::setenv("DISSIPAIR_THREADS", "lots", 1);
  CHECK_THROWS_AS(resolve_threads(std::nullopt), Error);
  ::unsetenv("DISSIPAIR_THREADS");
  CHECK(resolve_threads(std::nullopt) == 1);
}

TEST_CASE("stability grid and boundary") {
  const RunConfig cfg = parse_config(Json::parse(R"({"model": {"kind": "three_mode", "j1": 1, "j2": 1},
    "dissipator": {"cooling": 0, "heating": 2},
    "task": {"axes": [{"name": "j1_over_j2", "grid": [0.5]}, {"name": "eta", "grid": {"start": 0, "stop": 1, "count": 11}}]}})"));
  const OutputSet out = run_command("stability", cfg, 1);
  const std::string grid = out.files().at("stability.csv");
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 12);
  CHECK(grid.rfind("j1_over_j2,eta,max_re_correlated,stable_correlated,max_re_uncorrelated,stable_uncorrelated\n", 0) == 0);
  const std::string boundary = out.files().at("boundary.csv");
  const double eta_c = std::stod(boundary.substr(boundary.find("\n0.5,") + 5));
  CHECK(eta_c == doctest::Approx(0.5).epsilon(1e-6));

  const RunConfig single = parse_config(Json::parse(R"({"model": {"kind": "three_mode", "j1": 0.5, "j2": 1},
    "dissipator": {"cooling": 0, "heating": 2, "eta": 0.3}, "task": {"axes": [{"name": "kappa", "grid": [1]}]}})"));
  const std::string one = run_command("stability", single, 1).files().at("stability.csv");
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
}

TEST_CASE("gap and ep-scan commands") {
  const RunConfig gap = parse_config(Json::parse(R"({"model": {"kind": "ssh", "n": 8, "alpha": -0.5},
    "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": 0.99}, "task": {"sizes": [8, 12], "mirrored": "both"}})"));
  const std::string g = run_command("gap", gap, 1).files().at("gap.csv");
  CHECK(std::count(g.begin(), g.end(), '\n') == 3);

  const RunConfig odd = parse_config(Json::parse(R"({"model": {"kind": "ssh", "n": 8, "alpha": -0.5},
    "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": 0.99}, "task": {"sizes": [9]}})"));
  CHECK_THROWS_AS(run_command("gap", odd, 1), Error);

  const RunConfig ep = parse_config(Json::parse(R"({"model": {"kind": "dimer", "j1": 0.25, "j2": 0.2},
    "dissipator": {"cooling": 0, "heating": 1, "kappa": 2.0}, "task": {"eta": {"start": 0, "stop": 0.95, "count": 96}}})"));
  const Json points = Json::parse(run_command("ep-scan", ep, 1).files().at("ep_points.json"));
  REQUIRE(points["exceptional_points"]["correlated"].size() >= 1);
  CHECK(points["exceptional_points"]["uncorrelated"].empty());
  CHECK(points["exceptional_points"]["correlated"][0]["eta"].get<double>() ==
        doctest::Approx(points["closed_form"]["exceptional_eta"].get<double>()).epsilon(1e-6));
}

TEST_CASE("spectrum command on a short chain") {
  const RunConfig cfg = parse_config(Json::parse(R"({"model": {"kind": "ssh", "n": 9, "alpha": -0.65},
    "dissipator": {"cooling": 2, "heating": 0, "eta_ratio": 0.9},
    "task": {"grid": {"extent": 5, "points": 41}, "eta_sweep": [0.1, 0.15]}})"));
  const OutputSet out = run_command("spectrum", cfg, 1);
  const std::string sp = out.files().at("spectrum.csv");
  CHECK(sp.rfind("omega,P,theta_opt\n", 0) == 0);
  CHECK(std::count(sp.begin(), sp.end(), '\n') == 42);
  const std::string sw = out.files().at("eta_sweep.csv");
  CHECK(std::count(sw.begin(), sw.end(), '\n') == 3);
  const Json summary = Json::parse(out.files().at("summary.json"));
  CHECK(summary["p0"].get<double>() < 1.0);
}

TEST_CASE("entanglement command with mutual information") {
  const RunConfig cfg = parse_config(Json::parse(R"({"model": {"kind": "hofstadter", "nx": 8, "ny": 8},
    "dissipator": {"cooling": [5, 5], "heating": [3, 7], "eta_ratio": 0.9},
    "task": {"angles": 4, "mutual_information": [{"a": "row:7", "b": "row:0"}]}})"));
  const OutputSet out = run_command("entanglement", cfg, 1);
  const std::string angles = out.files().at("entropy_angles.csv");
  CHECK(std::count(angles.begin(), angles.end(), '\n') == 5);
  CHECK(out.files().count("mutual_information.csv") == 1);

  const RunConfig overlap = parse_config(Json::parse(R"({"model": {"kind": "hofstadter", "nx": 8, "ny": 8},
    "dissipator": {"cooling": [5, 5], "heating": [3, 7], "eta_ratio": 0.9},
    "task": {"mutual_information": [{"a": "row:7", "b": "edge"}]}})"));
  CHECK_THROWS_AS(run_command("entanglement", overlap, 1), Error);
}
