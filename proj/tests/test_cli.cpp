#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "selfheal/config.hpp"
#include "selfheal/harness.hpp"
#include "selfheal_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace selfheal;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "selfheal");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("selfheal_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 1 with a one-line diagnostic") {
  auto r = run({});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("train") != std::string::npos);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

  r = run({"train", "--agent", "td3", "--env", "discrete"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("continuous") != std::string::npos);

  r = run({"train", "--agent", "sarsa"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("qlearning") != std::string::npos);

  r = run({"train", "--agent", "heuristic", "--set", "env.bogus=1"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("env.bogus") != std::string::npos);

  r = run({"compare", "--agents", "heuristic"});
  CHECK(r.code == cli::kExitUsage);

  r = run({"gridsim", "--controller", "psychic"});
  CHECK(r.code == cli::kExitUsage);
}

TEST_CASE("help lists every configuration key with its default") {
  const auto r = run({"--help"});
  CHECK(r.code == cli::kExitOk);
  ExperimentConfig defaults;
  ConfigRegistry registry;
  bind_all(registry, defaults);
  for (const auto& key : registry.keys()) {
    CHECK_MESSAGE(r.out.find("  " + key + " = " + registry.get(key)) != std::string::npos, key);
  }
}

TEST_CASE("config file and overrides are applied") {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "exp.cfg");
    f << "# quick\neval.runs = 2\nenv.horizon = 30\n";
  }
  const auto r = run({"train", "--agent", "heuristic", "--config", (dir / "exp.cfg").string(), "--set",
                      "env.horizon=40", "--out", (dir / "out").string(), "--seed", "3"});
  REQUIRE(r.code == cli::kExitOk);
  std::ifstream traj(dir / "out" / "heuristic" / "discrete" / "trajectory.csv");
  int lines = 0;
  for (std::string line; std::getline(traj, line);) ++lines;
  CHECK(lines == 41);

  const auto missing = run({"train", "--agent", "heuristic", "--config", (dir / "none.cfg").string()});
  CHECK(missing.code != cli::kExitOk);
  fs::remove_all(dir);
}

TEST_CASE("train then eval reloads the saved policy") {
  const fs::path dir = scratch("eval");
  const std::string out = dir.string();
  REQUIRE(run({"train", "--agent", "qlearning", "--set", "qlearning.episodes=5", "--runs", "2", "--out", out})
              .code == cli::kExitOk);
  CHECK(fs::exists(dir / "qlearning" / "discrete" / "policy.csv"));
  const auto r = run({"eval", "--agent", "qlearning", "--runs", "2", "--out", out});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "qlearning" / "discrete" / "eval" / "summary.csv"));

  const auto none = run({"eval", "--agent", "dqn", "--out", out});
  CHECK(none.code == cli::kExitRuntime);
  fs::remove_all(dir);
}

TEST_CASE("gridsim writes the heatmap") {
  const fs::path dir = scratch("grid");
  const auto r = run({"gridsim", "--controller", "greedy", "--steps", "15", "--runs", "2", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  bool found = false;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    found = found || e.path().filename() == "heatmap_t15.csv";
  }
  CHECK(found);
  fs::remove_all(dir);
}

TEST_CASE("compare writes a sorted table") {
  const fs::path dir = scratch("cmp");
  const auto r = run({"compare", "--agents", "random,heuristic", "--runs", "2", "--out", dir.string()});
  REQUIRE(r.code == cli::kExitOk);
  std::ifstream in(dir / "compare.csv");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].rfind("heuristic,", 0) == 0);
  CHECK(lines[2].rfind("random,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("selfcheck passes") {
  const auto r = run({"selfcheck"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
