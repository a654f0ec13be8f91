#include "gradflow/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gradflow/errors.hpp"

namespace gradflow {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError(where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing required key \"") + key + "\"");
  return *it;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key \"" + it.key() + "\"");
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::vector<double> as_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<int> as_int_vector(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of integers");
  std::vector<int> out;
  out.reserve(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out.push_back(as_int(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Topology topology_from_json(const json& j, const std::string& where, int agent_count) {
  if (!j.is_object()) fail(where, "expected an object");
  check_keys(j, {"nodes", "edges"}, where);
  Topology g;
  g.node_count = j.contains("nodes") ? as_int(j["nodes"], where + ".nodes") : agent_count;
  if (g.node_count != agent_count)
    fail(where, "node count " + std::to_string(g.node_count) + " does not match the " +
                    std::to_string(agent_count) + " agents");
  const json& edges = require(j, "edges", where);
  if (!edges.is_array()) fail(where + ".edges", "expected an array of [tail, head] pairs");
  for (size_t k = 0; k < edges.size(); ++k) {
    const std::string ew = where + ".edges[" + std::to_string(k) + "]";
    const json& e = edges[k];
    if (!e.is_array() || e.size() != 2) fail(ew, "expected a [tail, head] pair");
    g.edges.push_back({as_int(e[0], ew), as_int(e[1], ew)});
  }
  try {
    validate_topology(g);
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  return g;
}

Problem problem_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");

  if (j.contains("ring")) {
    check_keys(j, {"ring"}, where);
    const json& r = j["ring"];
    int agents = 0;
    std::vector<double> desired;
    if (r.is_number_integer()) {
      agents = r.get<int>();
    } else if (r.is_object()) {
      check_keys(r, {"agents", "desired"}, where + ".ring");
      agents = as_int(require(r, "agents", where + ".ring"), where + ".ring.agents");
      if (r.contains("desired")) desired = as_vector(r["desired"], where + ".ring.desired");
    } else {
      fail(where + ".ring", "expected an agent count or {\"agents\", \"desired\"}");
    }
    if (desired.empty() && agents > 0) {
      desired.resize(static_cast<size_t>(agents));
      std::iota(desired.begin(), desired.end(), 1.0);
    }
    try {
      return build_ring_problem(agents, desired);
    } catch (const ValidationError& e) {
      fail(where + ".ring", e.what());
    }
  }

  check_keys(j, {"variables", "agents", "topology"}, where);
  const int n = as_int(require(j, "variables", where), where + ".variables");
  if (n <= 0) fail(where + ".variables", "must be positive");

  const json& agents = require(j, "agents", where);
  if (!agents.is_array() || agents.empty()) fail(where + ".agents", "expected a non-empty array");

  Problem p;
  p.cost.variable_count = n;
  for (size_t i = 0; i < agents.size(); ++i) {
    const std::string aw = where + ".agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    if (!a.is_object()) fail(aw, "expected an object");
    check_keys(a, {"Q", "b", "c", "dep"}, aw);

    const json& qj = require(a, "Q", aw);
    if (!qj.is_array()) fail(aw + ".Q", "expected an array of rows");
    std::vector<std::vector<double>> q;
    for (size_t r = 0; r < qj.size(); ++r)
      q.push_back(as_vector(qj[r], aw + ".Q[" + std::to_string(r) + "]"));
    const std::vector<double> b = as_vector(require(a, "b", aw), aw + ".b");
    const double c = a.contains("c") ? as_number(a["c"], aw + ".c") : 0.0;
    std::vector<int> dep;
    if (a.contains("dep")) dep = as_int_vector(a["dep"], aw + ".dep");

    try {
      p.cost.agents.push_back(std::make_shared<QuadraticAgentCost>(q, b, c, dep));
    } catch (const ValidationError& e) {
      fail(aw, e.what());
    }
  }

  p.topology = topology_from_json(require(j, "topology", where), where + ".topology",
                                  p.cost.agent_count());
  try {
    p.cost.validate();
  } catch (const ValidationError& e) {
    fail(where, e.what());
  }
  p.dependents = variable_dependents(p.cost);
  return p;
}

json problem_to_json(const Problem& p) {
  json agents = json::array();
  for (int i = 0; i < p.cost.agent_count(); ++i) {
    const QuadraticAgentCost* q = p.cost.agents[static_cast<size_t>(i)]->as_quadratic();
    if (q == nullptr)
      throw ValidationError("agent " + std::to_string(i) +
                            ": only quadratic costs can be echoed into a manifest");
    agents.push_back(
        json{{"Q", q->q()}, {"b", q->b()}, {"c", q->c()}, {"dep", q->dependency()}});
  }
  json edges = json::array();
  for (const Edge& e : p.topology.edges) edges.push_back(json::array({e.tail, e.head}));
  return json{{"variables", p.cost.variable_count},
              {"agents", agents},
              {"topology", json{{"nodes", p.topology.node_count}, {"edges", edges}}}};
}

void gains_from_json(const json& j, const std::string& where, GainSchedule& gains) {
  if (!j.is_object()) fail(where, "expected an object");
  check_keys(j, {"kG", "kP", "kIp"}, where);
  if (j.contains("kG")) {
    const json& kg = j["kG"];
    if (kg.is_number()) {
      gains.k_g = kg.get<double>();
      gains.fading.reset();
    } else if (kg.is_object()) {
      check_keys(kg, {"fading"}, where + ".kG");
      const json& f = require(kg, "fading", where + ".kG");
      if (!f.is_object()) fail(where + ".kG.fading", "expected an object");
      check_keys(f, {"a", "b"}, where + ".kG.fading");
      FadingGain fade;
      if (f.contains("a")) fade.a = as_number(f["a"], where + ".kG.fading.a");
      if (f.contains("b")) fade.b = as_number(f["b"], where + ".kG.fading.b");
      gains.fading = fade;
    } else {
      fail(where + ".kG", "expected a number or {\"fading\": {\"a\", \"b\"}}");
    }
  }
  if (j.contains("kP")) gains.k_p = as_number(j["kP"], where + ".kP");
  if (j.contains("kIp")) gains.k_ip = as_number(j["kIp"], where + ".kIp");
}

void integrator_from_json(const json& j, const std::string& where, IntegratorConfig& config) {
  if (!j.is_object()) fail(where, "expected an object");
  check_keys(j, {"scheme", "dt", "horizon", "record_stride", "stop_residual",
                 "record_multipliers"},
             where);
  if (j.contains("scheme")) {
    try {
      config.scheme = parse_scheme(as_string(j["scheme"], where + ".scheme"));
    } catch (const ValidationError& e) {
      fail(where + ".scheme", e.what());
    }
  }
  if (j.contains("dt")) config.dt = as_number(j["dt"], where + ".dt");
  if (j.contains("horizon")) config.horizon = as_number(j["horizon"], where + ".horizon");
  if (j.contains("record_stride"))
    config.record_stride = as_int(j["record_stride"], where + ".record_stride");
  if (j.contains("stop_residual"))
    config.stop_residual = as_number(j["stop_residual"], where + ".stop_residual");
  if (j.contains("record_multipliers"))
    config.record_multipliers = as_bool(j["record_multipliers"], where + ".record_multipliers");
}

}  // namespace

bool is_built_in_problem(const std::string& name) {
  return name == "line3" || name == "ring20" || name == "ring20-full" ||
         name == "ring20-reduced";
}

Scenario built_in_scenario(const std::string& name) {
  Scenario sc;
  if (name == "line3") {
    sc.problem = build_line3();
    sc.problem_name = "line3";
    sc.integrator.horizon = 2000.0;  // fading-gain settling near t = 870 must fit
  } else if (name == "ring20" || name == "ring20-full") {
    sc.problem = build_ring20();
    sc.problem_name = "ring20";
    sc.integrator.horizon = 10000.0;  // slowest fading-gain settling near t = 4900
    sc.integrator.record_multipliers = false;  // snapshots of the 400-copy state keep z only
  } else if (name == "ring20-reduced") {
    sc.problem = build_ring20();
    sc.problem_name = "ring20-reduced";
    sc.layout_mode = LayoutMode::reduced;
    sc.integrator.horizon = 2000.0;
    sc.integrator.record_multipliers = false;
  } else {
    throw ValidationError("unknown built-in problem \"" + name + "\"");
  }
  return sc;
}

Problem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("problem: invalid JSON: ") + e.what());
  }
  return problem_from_json(j, "problem");
}

Scenario parse_scenario(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("scenario", "top level must be an object");
  check_keys(j, {"problem", "topology", "layout", "method", "gains", "integrator", "z0", "out"},
             "scenario");

  Scenario sc;
  const json& pj = require(j, "problem", "scenario");
  if (pj.is_string()) {
    const std::string name = pj.get<std::string>();
    if (is_built_in_problem(name)) {
      sc = built_in_scenario(name);
    } else {
      std::filesystem::path path(name);
      if (path.is_relative() && !base_dir.empty())
        path = std::filesystem::path(base_dir) / path;
      std::ifstream in(path);
      if (!in) fail("scenario.problem", "cannot open problem file \"" + path.string() + "\"");
      std::stringstream buffer;
      buffer << in.rdbuf();
      try {
        sc.problem = parse_problem(buffer.str());
      } catch (const ValidationError& e) {
        fail("scenario.problem (" + path.string() + ")", e.what());
      }
      sc.problem_name = "inline";
    }
  } else if (pj.is_object()) {
    sc.problem = problem_from_json(pj, "scenario.problem");
    sc.problem_name = "inline";
  } else {
    fail("scenario.problem", "expected a built-in name, a file path, or an inline object");
  }

  if (j.contains("topology"))
    sc.problem.topology = topology_from_json(j["topology"], "scenario.topology",
                                             sc.problem.cost.agent_count());
  if (j.contains("layout")) {
    const std::string mode = as_string(j["layout"], "scenario.layout");
    if (mode == "full")
      sc.layout_mode = LayoutMode::full;
    else if (mode == "reduced")
      sc.layout_mode = LayoutMode::reduced;
    else
      fail("scenario.layout", "expected \"full\" or \"reduced\", got \"" + mode + "\"");
  }
  if (j.contains("method")) {
    try {
      sc.method = parse_method(as_string(j["method"], "scenario.method"));
    } catch (const ValidationError& e) {
      fail("scenario.method", e.what());
    }
  }
  if (j.contains("gains")) gains_from_json(j["gains"], "scenario.gains", sc.gains);
  if (j.contains("integrator"))
    integrator_from_json(j["integrator"], "scenario.integrator", sc.integrator);
  if (j.contains("z0")) sc.z0 = as_vector(j["z0"], "scenario.z0");
  if (j.contains("out")) sc.out = as_string(j["out"], "scenario.out");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file \"" + path + "\"");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str(), std::filesystem::path(path).parent_path().string());
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string scenario_manifest(const Scenario& sc) {
  json j;
  if (sc.problem_name != "inline" && is_built_in_problem(sc.problem_name))
    j["problem"] = sc.problem_name;
  else
    j["problem"] = problem_to_json(sc.problem);
  j["layout"] = sc.layout_mode == LayoutMode::full ? "full" : "reduced";
  j["method"] = method_name(sc.method);

  json gains;
  if (sc.gains.fading)
    gains["kG"] = json{{"fading", json{{"a", sc.gains.fading->a}, {"b", sc.gains.fading->b}}}};
  else
    gains["kG"] = sc.gains.k_g;
  gains["kP"] = sc.gains.k_p;
  gains["kIp"] = sc.gains.k_ip;
  j["gains"] = gains;

  json ic;
  ic["scheme"] = scheme_name(sc.integrator.scheme);
  ic["dt"] = sc.integrator.dt;
  ic["horizon"] = sc.integrator.horizon;
  ic["record_stride"] = sc.integrator.record_stride;
  if (sc.integrator.stop_residual) ic["stop_residual"] = *sc.integrator.stop_residual;
  ic["record_multipliers"] = sc.integrator.record_multipliers;
  j["integrator"] = ic;

  if (!sc.z0.empty()) j["z0"] = sc.z0;
  return j.dump(2) + "\n";
}

AggregateLayout build_layout(const Scenario& sc) {
  // build_incidence also validates the graph and demands connectivity, which
  // reduced layouts need just as much (augmentation paths must exist).
  const EdgeMatrixSet ems = build_incidence(sc.problem.topology);
  if (sc.layout_mode == LayoutMode::full)
    return aggregate_full(ems, sc.problem.cost.variable_count);
  std::vector<std::vector<int>> sets = sc.problem.dependents;
  for (std::vector<int>& s : sets)
    if (!s.empty()) s = augment_to_connected(sc.problem.topology, s);
  return aggregate_reduced(sc.problem.topology, sets);
}

}  // namespace gradflow
