#pragma once

#include <string>
#include <vector>

#include "gradflow/costs.hpp"
#include "gradflow/dynamics.hpp"
#include "gradflow/integrator.hpp"

namespace gradflow {

/// A fully resolved experiment description: the problem instance plus every
/// knob that affects the run. Scenarios come from JSON files, from built-in
/// names, or from run manifests (which are themselves valid scenario files).
struct Scenario {
  /// Built-in name ("line3", "ring20", ...) when the problem is compiled in;
  /// otherwise "inline" and the problem definition travels in the manifest.
  std::string problem_name;
  Problem problem;
  LayoutMode layout_mode = LayoutMode::full;
  Method method = Method::PI;
  GainSchedule gains;
  IntegratorConfig integrator;
  std::vector<double> z0;  // empty -> all zeros
  std::string out;         // output root requested by the file ("" -> unset)
};

/// Scenario with built-in defaults for a named problem: unit gains, zero
/// initial state, rk4 with dt = 0.01 sampled every 10 steps, and a horizon
/// long enough for the slowest published settling time of that problem.
/// Names: "line3", "ring20" (alias "ring20-full"), "ring20-reduced".
Scenario built_in_scenario(const std::string& name);

bool is_built_in_problem(const std::string& name);

/// Parses scenario JSON. Unknown keys are rejected. `base_dir` anchors
/// relative problem-file references. Throws ValidationError with the JSON
/// path of the offending field.
Scenario parse_scenario(const std::string& text, const std::string& base_dir);

/// Reads and parses a scenario file; relative problem paths resolve against
/// the file's directory.
Scenario load_scenario(const std::string& path);

/// Parses a problem definition: {"variables": n, "agents": [{"Q", "b", "c",
/// "dep"?}, ...], "topology": {"edges": [[tail, head], ...]}} or the ring
/// shorthand {"ring": N | {"agents": N, "desired": [...]}}.
Problem parse_problem(const std::string& text);

/// Canonical JSON echo of everything that affects the run (the output root is
/// deliberately excluded). Parsing the result reproduces the scenario
/// bit-for-bit; every run directory stores this as manifest.json.
std::string scenario_manifest(const Scenario& sc);

/// The aggregate layout the scenario runs on. Reduced layouts are built from
/// the per-variable dependent sets, each augmented along shortest paths until
/// its induced subgraph is connected (a tracked variable must be relayable).
AggregateLayout build_layout(const Scenario& sc);

}  // namespace gradflow
