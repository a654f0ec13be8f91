#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gradflow/runner.hpp"
#include "gradflow/scenario.hpp"

using namespace gradflow;
namespace fs = std::filesystem;

namespace {

fs::path test_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() / ("gradflow_runner_" + std::to_string(getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
  REQUIRE(out.good());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

CommandResult run_command(const std::string& command) {
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  CommandResult result;
  result.output = output;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string cli_bin() {
  const char* bin = std::getenv("GRADFLOW_CLI_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "GRADFLOW_CLI_BIN must point at the CLI binary");
  return bin;
}

int count_lines_matching(const std::string& text, const std::string& needle) {
  int count = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.find(needle) != std::string::npos) ++count;
  return count;
}

}  // namespace

TEST_CASE("built-in scenarios carry the documented defaults") {
  const Scenario line3 = parse_scenario(R"({"problem": "line3"})", "");
  CHECK(line3.problem_name == "line3");
  CHECK(line3.method == Method::PI);
  CHECK(line3.layout_mode == LayoutMode::full);
  CHECK(line3.gains.k_g == 1.0);
  CHECK(!line3.gains.fading.has_value());
  CHECK(line3.gains.k_p == 1.0);
  CHECK(line3.gains.k_ip == 1.0);
  CHECK(line3.integrator.scheme == Scheme::rk4);
  CHECK(line3.integrator.dt == 0.01);
  CHECK(line3.integrator.horizon == 2000.0);
  CHECK(line3.integrator.record_stride == 10);
  CHECK(line3.integrator.record_multipliers);
  CHECK(line3.z0.empty());

  const Scenario ring = parse_scenario(R"({"problem": "ring20"})", "");
  CHECK(ring.integrator.horizon == 10000.0);
  CHECK(!ring.integrator.record_multipliers);
  CHECK(ring.layout_mode == LayoutMode::full);
  CHECK(ring.problem.cost.agent_count() == 20);

  const Scenario reduced = parse_scenario(R"({"problem": "ring20-reduced"})", "");
  CHECK(reduced.layout_mode == LayoutMode::reduced);
  CHECK(reduced.integrator.horizon == 2000.0);

  const Scenario full_alias = parse_scenario(R"({"problem": "ring20-full"})", "");
  CHECK(full_alias.problem_name == "ring20");
  CHECK(full_alias.layout_mode == LayoutMode::full);
}

TEST_CASE("scenario fields override the defaults") {
  const Scenario sc = parse_scenario(R"({
    "problem": "line3",
    "method": "i",
    "layout": "reduced",
    "gains": {"kG": {"fading": {"a": 2.0, "b": 0.5}}, "kIp": 3.0},
    "integrator": {"scheme": "euler", "dt": 0.5, "horizon": 80.0,
                   "record_stride": 4, "stop_residual": 1e-7,
                   "record_multipliers": false},
    "z0": [1, 2, 3, 4, 5, 6],
    "out": "elsewhere"
  })",
                                     "");
  CHECK(sc.method == Method::I);
  CHECK(sc.layout_mode == LayoutMode::reduced);
  REQUIRE(sc.gains.fading.has_value());
  CHECK(sc.gains.k_g_at(0.0) == 2.0);
  CHECK(sc.gains.k_g_at(2.0) == doctest::Approx(1.0));
  CHECK(sc.gains.k_ip == 3.0);
  CHECK(sc.integrator.scheme == Scheme::euler);
  CHECK(sc.integrator.dt == 0.5);
  CHECK(sc.integrator.horizon == 80.0);
  CHECK(sc.integrator.record_stride == 4);
  REQUIRE(sc.integrator.stop_residual.has_value());
  CHECK(*sc.integrator.stop_residual == 1e-7);
  CHECK(!sc.integrator.record_multipliers);
  CHECK(sc.z0 == std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(sc.out == "elsewhere");

  // A constant kG replaces the built-in fading block, not the other way round.
  const Scenario constant = parse_scenario(R"({"problem": "line3", "gains": {"kG": 3.0}})", "");
  CHECK(!constant.gains.fading.has_value());
  CHECK(constant.gains.k_g == 3.0);
}

TEST_CASE("scenario parsing rejects malformed input with field paths") {
  CHECK_THROWS_AS(parse_scenario("not json", ""), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"([1, 2])", ""), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({})", ""), ValidationError);  // missing problem
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "methods": "pi"})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "method": "pid"})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "layout": "sparse"})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "gains": {"kI": 1.0}})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "gains": {"kG": "big"}})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "integrator": {"step": 0.1}})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line3", "z0": [1, "x"]})", ""),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": "line4"})", ""),
                  ValidationError);  // unknown name falls through to a missing file
  CHECK_THROWS_AS(parse_scenario(R"({"problem": 7})", ""), ValidationError);

  try {
    parse_scenario(R"({"problem": "line3", "gains": {"kP": "strong"}})", "");
    FAIL("expected a ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("scenario.gains.kP") != std::string::npos);
  }
}

TEST_CASE("inline problems and the ring shorthand parse") {
  const Scenario ring6 = parse_scenario(R"({"problem": {"ring": 6}, "method": "pi"})", "");
  CHECK(ring6.problem_name == "inline");
  CHECK(ring6.problem.cost.agent_count() == 6);
  CHECK(ring6.problem.topology.edge_count() == 6);
  for (int a = 0; a < 6; ++a) CHECK(ring6.problem.cost.dependency(a).size() == 3);

  const Scenario custom = parse_scenario(R"({
    "problem": {"ring": {"agents": 4, "desired": [2, 2, 2, 2]}}
  })",
                                         "");
  const OracleResult oracle = solve_consensus_optimum(custom.problem.cost);
  for (const double v : oracle.x_star) CHECK(v == doctest::Approx(2.0));

  const Scenario inline_problem = parse_scenario(R"({
    "problem": {
      "variables": 1,
      "agents": [
        {"Q": [[2]], "b": [-2], "c": 1},
        {"Q": [[2]], "b": [-6], "c": 9}
      ],
      "topology": {"edges": [[0, 1]]}
    }
  })",
                                                 "");
  CHECK(inline_problem.problem.cost.agent_count() == 2);
  const OracleResult mid = solve_consensus_optimum(inline_problem.problem.cost);
  CHECK(mid.x_star[0] == doctest::Approx(2.0));  // (x-1)^2 + (x-3)^2 minimized at 2

  CHECK_THROWS_AS(parse_scenario(R"({"problem": {"ring": 2}})", ""), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": {"variables": 1}})", ""), ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"({"problem": {"ring": 4, "variables": 1}})", ""),
                  ValidationError);
}

TEST_CASE("problem files resolve relative to the scenario") {
  const fs::path dir = test_root() / "problem_files";
  fs::create_directories(dir);
  write_file(dir / "pair.json", R"({
    "variables": 1,
    "agents": [
      {"Q": [[2]], "b": [0], "c": 0},
      {"Q": [[2]], "b": [-8], "c": 8}
    ],
    "topology": {"edges": [[0, 1]]}
  })");
  write_file(dir / "scenario.json", R"({"problem": "pair.json", "method": "i"})");

  const Scenario sc = load_scenario((dir / "scenario.json").string());
  CHECK(sc.problem_name == "inline");
  CHECK(sc.problem.cost.agent_count() == 2);
  CHECK(sc.method == Method::I);
  CHECK(sc.integrator.horizon == 100.0);  // custom problems use the plain default

  CHECK_THROWS_AS(parse_scenario(R"({"problem": "missing.json"})", dir.string()),
                  ValidationError);
}

TEST_CASE("topology overrides replace the communication graph") {
  const Scenario sc = parse_scenario(R"({
    "problem": "line3",
    "topology": {"edges": [[0, 1], [1, 2], [0, 2]]}
  })",
                                     "");
  CHECK(sc.problem.topology.edge_count() == 3);
  const AggregateLayout layout = build_layout(sc);
  CHECK(layout.z_dim == 6);
  CHECK(layout.mu_dim == 6);  // two variables over three edges

  CHECK_THROWS_AS(parse_scenario(R"({
    "problem": "line3",
    "topology": {"nodes": 4, "edges": [[0, 1], [1, 2], [2, 3]]}
  })",
                                 ""),
                  ValidationError);  // node count must match the agents
}

TEST_CASE("manifests echo the scenario canonically") {
  const Scenario sc = parse_scenario(R"({
    "problem": "line3",
    "method": "p",
    "gains": {"kG": {"fading": {"a": 1.0, "b": 0.1}}},
    "integrator": {"stop_residual": 1e-8},
    "z0": [0.25, 0, 0, 0, 0, -1.5]
  })",
                                     "");
  const std::string manifest = scenario_manifest(sc);
  const Scenario back = parse_scenario(manifest, "");
  CHECK(scenario_manifest(back) == manifest);
  CHECK(run_id(back) == run_id(sc));
  CHECK(manifest.find("\"out\"") == std::string::npos);  // plumbing stays out of the identity

  // Inline problems are echoed in full so manifests remain self-contained.
  const Scenario ring = parse_scenario(R"({"problem": {"ring": 5}})", "");
  const Scenario ring_back = parse_scenario(scenario_manifest(ring), "");
  CHECK(scenario_manifest(ring_back) == scenario_manifest(ring));
  CHECK(ring_back.problem.cost.agent_count() == 5);

  // The id tracks anything that changes the outputs.
  Scenario tweaked = sc;
  tweaked.integrator.dt = 0.02;
  CHECK(run_id(tweaked) != run_id(sc));
}

TEST_CASE("execute_scenario integrates and certifies a run") {
  Scenario sc = parse_scenario(R"({
    "problem": "line3",
    "method": "pi",
    "integrator": {"horizon": 50.0}
  })",
                               "");
  const RunResult result = execute_scenario(sc);
  CHECK(result.run_id == run_id(sc));
  CHECK(result.trajectory.reason == StopReason::horizon);
  CHECK(result.consensus_residual < 1e-3);
  REQUIRE(result.stationarity_residual.has_value());
  CHECK(*result.stationarity_residual < 1e-3);
  CHECK(result.optimality_gap < 1e-3);
  CHECK(result.oracle.x_star[0] == doctest::Approx(3.4));
  CHECK(result.metrics.entries.size() == 6);

  // The consensus-only flow keeps a strictly positive disagreement and
  // reports no stationarity certificate.
  sc.method = Method::P;
  const RunResult biased = execute_scenario(sc);
  CHECK(!biased.stationarity_residual.has_value());
  CHECK(biased.consensus_residual > 1e-2);

  // z0 is the first snapshot, verbatim.
  sc.method = Method::PI;
  sc.z0 = {3.4, 3.4, 3.4, 3.2, 3.2, 3.2};
  sc.integrator.horizon = 1.0;
  const RunResult seeded = execute_scenario(sc);
  CHECK(seeded.trajectory.states[0].z == sc.z0);

  sc.z0 = {1.0, 2.0};
  CHECK_THROWS_AS(execute_scenario(sc), ValidationError);
}

TEST_CASE("reduced layouts augment disconnected tracking sets") {
  const Scenario sc = parse_scenario(R"({
    "problem": {
      "variables": 2,
      "agents": [
        {"Q": [[2, 0], [0, 0]], "b": [0, 0], "c": 0, "dep": [0]},
        {"Q": [[0, 0], [0, 2]], "b": [0, -2], "c": 0, "dep": [1]},
        {"Q": [[2, 0], [0, 0]], "b": [-4, 0], "c": 2, "dep": [0]}
      ],
      "topology": {"edges": [[0, 1], [1, 2]]}
    },
    "layout": "reduced"
  })",
                                     "");
  // Agents 0 and 2 share variable 0 but only communicate through agent 1.
  CHECK(sc.problem.dependents[0] == std::vector<int>{0, 2});
  CHECK_THROWS_AS(aggregate_reduced(sc.problem.topology, sc.problem.dependents),
                  ValidationError);
  const AggregateLayout layout = build_layout(sc);
  CHECK(layout.tracks(1, 0));  // relay agent pulled into the tracking set
  CHECK(!layout.tracks(0, 1));
  CHECK(layout.z_dim == 4);
}

TEST_CASE("output roots resolve in precedence order") {
  Scenario sc;
  unsetenv("GRADFLOW_OUT");
  CHECK(resolve_out_root("", sc) == "out");
  setenv("GRADFLOW_OUT", "/env/root", 1);
  CHECK(resolve_out_root("", sc) == "/env/root");
  sc.out = "from-scenario";
  CHECK(resolve_out_root("", sc) == "from-scenario");
  CHECK(resolve_out_root("from-flag", sc) == "from-flag");
  unsetenv("GRADFLOW_OUT");
}

TEST_CASE("table definitions pair the published values with the right runs") {
  for (const std::string name : {"table1", "table2", "table3"}) {
    const auto published = published_table(name);
    REQUIRE(published.size() == 4);
    CHECK(published[0].label == "P (kG=1)");
    CHECK(published[3].label == "PI");
    const auto scenarios = table_scenarios(name, std::nullopt, std::nullopt);
    REQUIRE(scenarios.size() == 4);
    CHECK(scenarios[0].method == Method::P);
    CHECK(!scenarios[0].gains.fading.has_value());
    CHECK(scenarios[1].method == Method::P);
    REQUIRE(scenarios[1].gains.fading.has_value());
    CHECK(scenarios[1].gains.fading->a == 1.0);
    CHECK(scenarios[1].gains.fading->b == 0.1);
    CHECK(scenarios[2].method == Method::I);
    CHECK(scenarios[3].method == Method::PI);
    for (const Scenario& s : scenarios) CHECK(!s.integrator.record_multipliers);
  }
  CHECK(published_table("table3")[1].error_pct == 5.3);
  CHECK(table_scenarios("table2", std::nullopt, std::nullopt)[0].layout_mode ==
        LayoutMode::full);
  CHECK(table_scenarios("table3", std::nullopt, std::nullopt)[0].layout_mode ==
        LayoutMode::reduced);
  const auto overridden = table_scenarios("table1", 0.05, 120.0);
  for (const Scenario& s : overridden) {
    CHECK(s.integrator.dt == 0.05);
    CHECK(s.integrator.horizon == 120.0);
  }
  CHECK_THROWS_AS(published_table("table9"), ValidationError);
  CHECK_THROWS_AS(table_scenarios("table9", std::nullopt, std::nullopt), ValidationError);
}

TEST_CASE("cli: run writes re-runnable artifacts") {
  const std::string bin = cli_bin();
  const fs::path dir = test_root() / "cli_run";
  fs::create_directories(dir);
  write_file(dir / "scenario.json",
             R"({"problem": "line3", "method": "pi", "integrator": {"horizon": 5.0}})");

  const CommandResult first = run_command(bin + " run --scenario " +
                                          (dir / "scenario.json").string() + " --out " +
                                          (dir / "a").string());
  CAPTURE(first.output);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("worst case") != std::string::npos);
  CHECK(first.output.find("artifacts: ") != std::string::npos);

  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir / "a")) runs.push_back(entry.path());
  REQUIRE(runs.size() == 1);
  const fs::path run_dir = runs[0];
  for (const char* artifact : {"manifest.json", "trajectory.csv", "metrics.csv", "oracle.json"})
    CHECK(fs::exists(run_dir / artifact));

  const CommandResult rerun = run_command(bin + " run --scenario " +
                                          (run_dir / "manifest.json").string() + " --out " +
                                          (dir / "b").string());
  REQUIRE(rerun.exit_code == 0);
  const fs::path rerun_dir = dir / "b" / run_dir.filename();
  REQUIRE(fs::exists(rerun_dir));  // same id: same inputs
  CHECK(read_file(rerun_dir / "trajectory.csv") == read_file(run_dir / "trajectory.csv"));
  CHECK(read_file(rerun_dir / "metrics.csv") == read_file(run_dir / "metrics.csv"));

  const std::string header = read_file(run_dir / "trajectory.csv");
  CHECK(header.rfind("time,z[0],z[1],z[2],z[3],z[4],z[5],mu[0]", 0) == 0);
}

TEST_CASE("cli: failures map to the documented exit codes") {
  const std::string bin = cli_bin();
  const fs::path dir = test_root() / "cli_errors";
  fs::create_directories(dir);

  write_file(dir / "bad.json", R"({"problem": "line3", "methods": "pi"})");
  const CommandResult malformed = run_command(bin + " run --scenario " +
                                              (dir / "bad.json").string() + " --out " +
                                              (dir / "bad_out").string());
  CHECK(malformed.exit_code == 1);
  CHECK(malformed.output.find("unknown key") != std::string::npos);
  CHECK(!fs::exists(dir / "bad_out"));  // no partial outputs

  write_file(dir / "div.json",
             R"({"problem": "line3", "integrator": {"dt": 5.0, "horizon": 2000.0}})");
  const CommandResult diverged = run_command(bin + " run --scenario " +
                                             (dir / "div.json").string() + " --out " +
                                             (dir / "div_out").string());
  CHECK(diverged.exit_code == 2);
  CHECK(diverged.output.find("diverged at t =") != std::string::npos);
  CHECK(!fs::exists(dir / "div_out"));

  const CommandResult nocmd = run_command(bin);
  CHECK(nocmd.exit_code == 1);
  const CommandResult badflag = run_command(bin + " table table9");
  CHECK(badflag.exit_code == 1);
  const CommandResult help = run_command(bin + " --help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("plotdata") != std::string::npos);
}

TEST_CASE("cli: verify reports and fails through exit code 3") {
  const std::string bin = cli_bin();
  const CommandResult ok = run_command(bin + " verify");
  CAPTURE(ok.output);
  CHECK(ok.exit_code == 0);
  CHECK(count_lines_matching(ok.output, "[ ok ]") >= 9);
  CHECK(count_lines_matching(ok.output, "[FAIL]") == 0);

  const CommandResult fault = run_command(bin + " verify --fault=gradient");
  CAPTURE(fault.output);
  CHECK(fault.exit_code == 3);
  CHECK(count_lines_matching(fault.output, "[FAIL]") == 1);
  CHECK(fault.output.find("gradient vs finite differences") != std::string::npos);
}

TEST_CASE("cli: plotdata reshapes runs into labeled series") {
  const std::string bin = cli_bin();
  const fs::path dir = test_root() / "cli_plot";
  fs::create_directories(dir);
  write_file(dir / "scenario.json",
             R"({"problem": "line3", "method": "pi", "integrator": {"horizon": 2.0}})");
  REQUIRE(run_command(bin + " run --scenario " + (dir / "scenario.json").string() + " --out " +
                      (dir / "o").string())
              .exit_code == 0);
  fs::path run_dir;
  for (const auto& entry : fs::directory_iterator(dir / "o")) run_dir = entry.path();
  const std::string traj = (run_dir / "trajectory.csv").string();

  const CommandResult all = run_command(bin + " plotdata " + traj);
  REQUIRE(all.exit_code == 0);
  CHECK(all.output.rfind("time,series,value\n", 0) == 0);
  for (const char* label : {"agent0_var0", "agent1_var0", "agent2_var0", "agent0_var1",
                            "agent1_var1", "agent2_var1"})
    CHECK(all.output.find(label) != std::string::npos);

  const CommandResult picked =
      run_command(bin + " plotdata " + traj + " --variable 1 --agents 0,2");
  REQUIRE(picked.exit_code == 0);
  CHECK(picked.output.find("agent0_var1") != std::string::npos);
  CHECK(picked.output.find("agent2_var1") != std::string::npos);
  CHECK(picked.output.find("agent1_var1") == std::string::npos);
  CHECK(picked.output.find("var0") == std::string::npos);

  CHECK(run_command(bin + " plotdata " + traj + " --variable 9").exit_code == 1);
  CHECK(run_command(bin + " plotdata " + traj + " --agents 77").exit_code == 1);
  CHECK(run_command(bin + " plotdata " + (dir / "nowhere.csv").string()).exit_code == 1);
}

TEST_CASE("cli: table smoke run emits the comparison and its artifacts") {
  const std::string bin = cli_bin();
  const fs::path dir = test_root() / "cli_table";
  fs::create_directories(dir);

  const CommandResult table = run_command(bin + " table table1 --horizon 2 --out " +
                                          (dir / "t").string());
  CAPTURE(table.output);
  REQUIRE(table.exit_code == 0);
  CHECK(table.output.find("pub") != std::string::npos);
  CHECK(table.output.find("P (fading kG)") != std::string::npos);
  // Every flow is still in transit at t = 2, so the 1 % band is never held.
  CHECK(table.output.find("> 2") != std::string::npos);

  fs::path table_dir;
  for (const auto& entry : fs::directory_iterator(dir / "t")) table_dir = entry.path();
  CHECK(fs::exists(table_dir / "table.txt"));
  CHECK(fs::exists(table_dir / "table.csv"));
  int run_dirs = 0;
  for (const auto& entry : fs::directory_iterator(table_dir))
    if (entry.is_directory()) {
      ++run_dirs;
      CHECK(fs::exists(entry.path() / "manifest.json"));
      CHECK(fs::exists(entry.path() / "metrics.csv"));
      CHECK(fs::exists(entry.path() / "oracle.json"));
      CHECK(!fs::exists(entry.path() / "trajectory.csv"));  // tables skip trajectories
    }
  CHECK(run_dirs == 4);

  const std::string csv = read_file(table_dir / "table.csv");
  CHECK(csv.rfind("configuration,metric,computed,published,computed_at_horizon\n", 0) == 0);
  CHECK(count_lines_matching(csv, "settle10") == 4);
}

TEST_CASE("cli: GRADFLOW_OUT provides the default output root") {
  const std::string bin = cli_bin();
  const fs::path dir = test_root() / "cli_env";
  fs::create_directories(dir);
  write_file(dir / "scenario.json",
             R"({"problem": "line3", "method": "i", "integrator": {"horizon": 1.0}})");
  const CommandResult result =
      run_command("GRADFLOW_OUT=" + (dir / "env_out").string() + " " + bin +
                  " run --scenario " + (dir / "scenario.json").string());
  REQUIRE(result.exit_code == 0);
  bool found = false;
  for (const auto& entry : fs::directory_iterator(dir / "env_out"))
    if (entry.path().filename().string().rfind("run-", 0) == 0) found = true;
  CHECK(found);
}
