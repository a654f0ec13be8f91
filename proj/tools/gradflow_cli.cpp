#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradflow/errors.hpp"
#include "gradflow/runner.hpp"
#include "gradflow/scenario.hpp"
#include "gradflow/verify.hpp"

namespace {

using namespace gradflow;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

/// Reshapes a trajectory CSV into long format (time, series, value) on
/// stdout. The sibling manifest.json recovers which column is which agent's
/// copy of which variable.
void emit_plot_data(const std::string& csv_path, std::optional<int> variable,
                    std::vector<int> agents) {
  const std::filesystem::path path(csv_path);
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory file \"" + csv_path + "\"");
  const std::filesystem::path manifest = path.parent_path() / "manifest.json";
  if (!std::filesystem::exists(manifest))
    throw ValidationError("no manifest.json next to \"" + csv_path +
                          "\"; plot selection needs the run's layout");
  const Scenario sc = load_scenario(manifest.string());
  const AggregateLayout layout = build_layout(sc);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("\"" + csv_path + "\" is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "time")
    throw ValidationError("\"" + csv_path + "\" is not a trajectory CSV (no time column)");
  int z_columns = 0;
  while (1 + z_columns < static_cast<int>(header.size()) &&
         header[static_cast<size_t>(1 + z_columns)].rfind("z[", 0) == 0)
    ++z_columns;
  if (z_columns != layout.z_dim)
    throw ValidationError("trajectory has " + std::to_string(z_columns) +
                          " state columns but the manifest layout has " +
                          std::to_string(layout.z_dim));

  std::vector<int> variables;
  if (variable) {
    if (*variable < 0 || *variable >= layout.variable_count)
      throw ValidationError("variable " + std::to_string(*variable) +
                            " out of range (problem has " +
                            std::to_string(layout.variable_count) + ")");
    variables.push_back(*variable);
  } else {
    for (int j = 0; j < layout.variable_count; ++j) variables.push_back(j);
  }
  const bool agents_requested = !agents.empty();
  if (!agents_requested)
    for (int i = 0; i < layout.agent_count; ++i) agents.push_back(i);

  struct Series {
    std::string label;
    int column = 0;
  };
  std::vector<Series> selection;
  for (const int agent : agents) {
    if (agent < 0 || agent >= layout.agent_count)
      throw ValidationError("agent " + std::to_string(agent) + " out of range (problem has " +
                            std::to_string(layout.agent_count) + ")");
    for (const int j : variables) {
      if (!layout.tracks(agent, j)) {
        if (agents_requested)
          throw ValidationError("agent " + std::to_string(agent) + " does not track variable " +
                                std::to_string(j) + " in this layout");
        continue;  // unselected agents simply contribute nothing
      }
      selection.push_back({"agent" + std::to_string(agent) + "_var" + std::to_string(j),
                           1 + layout.z_index(agent, j)});
    }
  }
  if (selection.empty()) throw ValidationError("selection matches no tracked scalar");

  std::ostringstream out;
  out << "time,series,value\n";
  char buf[40];
  size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) < 1 + z_columns)
      throw ValidationError("\"" + csv_path + "\": short row at line " +
                            std::to_string(rows + 2));
    for (const Series& s : selection) {
      const double value = std::strtod(fields[static_cast<size_t>(s.column)].c_str(), nullptr);
      std::snprintf(buf, sizeof buf, "%.17g", value);
      out << fields[0] << ',' << s.label << ',' << buf << '\n';
    }
    ++rows;
  }
  std::cout << out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time distributed optimization flows: experiments, tables, checks"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_root;
  CLI::App* run_cmd = app.add_subcommand("run", "Integrate a scenario and write its artifacts");
  run_cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  run_cmd->add_option("--out", out_root,
                      "Output root (overrides the scenario's own and GRADFLOW_OUT)");

  std::string table_name;
  double dt_value = 0.0;
  double horizon_value = 0.0;
  std::string table_out;
  CLI::App* table_cmd =
      app.add_subcommand("table", "Run a benchmark table's four gain configurations");
  table_cmd->add_option("name", table_name, "table1 | table2 | table3")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "table3"}));
  CLI::Option* dt_opt =
      table_cmd->add_option("--dt", dt_value, "Integration step override for all four runs");
  CLI::Option* horizon_opt =
      table_cmd->add_option("--horizon", horizon_value, "Horizon override for all four runs");
  table_cmd->add_option("--out", table_out, "Output root (overrides GRADFLOW_OUT)");

  std::string fault_name = "none";
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant suite");
  verify_cmd->add_option("--fault", fault_name, "Inject a defect: none | gradient")
      ->check(CLI::IsMember({"none", "gradient"}));

  std::string trajectory_path;
  int variable_value = 0;
  std::vector<int> agent_list;
  CLI::App* plot_cmd = app.add_subcommand(
      "plotdata", "Reshape a run's trajectory CSV into long format (time, series, value)");
  plot_cmd->add_option("file", trajectory_path, "trajectory.csv from a run directory")
      ->required();
  CLI::Option* variable_opt =
      plot_cmd->add_option("--variable", variable_value, "Keep one variable (default: all)");
  plot_cmd->add_option("--agents", agent_list, "Comma-separated agent ids (default: all)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad usage is a validation failure
  }

  try {
    if (run_cmd->parsed()) {
      const Scenario sc = load_scenario(scenario_path);
      const RunResult result = run_scenario(sc, resolve_out_root(out_root, sc));
      std::cout << format_run_summary(result);
    } else if (table_cmd->parsed()) {
      const std::optional<double> dt =
          dt_opt->count() > 0 ? std::optional<double>(dt_value) : std::nullopt;
      const std::optional<double> horizon =
          horizon_opt->count() > 0 ? std::optional<double>(horizon_value) : std::nullopt;
      const TableResult table =
          run_table(table_name, dt, horizon, resolve_out_root(table_out, Scenario{}));
      std::cout << format_table(table);
      if (!table.table_dir.empty()) std::cout << "\nartifacts: " << table.table_dir << "\n";
    } else if (verify_cmd->parsed()) {
      const VerifyReport report = run_verification(parse_fault(fault_name));
      std::cout << format_verification(report);
      if (!report.all_pass()) return 3;
    } else if (plot_cmd->parsed()) {
      const std::optional<int> variable =
          variable_opt->count() > 0 ? std::optional<int>(variable_value) : std::nullopt;
      emit_plot_data(trajectory_path, variable, agent_list);
    }
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
