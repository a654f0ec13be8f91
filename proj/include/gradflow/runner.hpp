#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gradflow/metrics.hpp"
#include "gradflow/oracle.hpp"
#include "gradflow/scenario.hpp"

namespace gradflow {

/// One executed scenario: the integrated trajectory, its worst-case metrics,
/// and the ground-truth certificates evaluated at the final state.
struct RunResult {
  std::string run_id;
  Scenario scenario;
  Trajectory trajectory;
  WorstCaseReport metrics;
  OracleResult oracle;
  double consensus_residual = 0.0;
  /// || k_G(T) grad f + k_I' D mu || for I/PI, || grad f + L mu || for the
  /// Laplacian form; absent for P, whose steady state is biased by design.
  std::optional<double> stationarity_residual;
  double optimality_gap = 0.0;
  std::string run_dir;  // empty when the run was not written to disk
};

/// Stable id of everything that affects the run's outputs: a 64-bit FNV-1a
/// hash of the canonical manifest, in hex. Two scenarios share an id exactly
/// when they produce identical artifacts.
std::string run_id(const Scenario& sc);

/// Integrates the scenario and evaluates metrics and certificates in memory;
/// no filesystem access. Throws ValidationError for inconsistent setups and
/// DivergenceError (with the time stamp) when the state blows up.
RunResult execute_scenario(const Scenario& sc);

/// execute_scenario plus artifacts under <out_root>/run-<id>/: manifest.json
/// (a re-runnable scenario echo), trajectory.csv (unless write_trajectory is
/// false), metrics.csv, and oracle.json. Nothing is written until the run has
/// succeeded, so failed runs leave no partial outputs.
RunResult run_scenario(const Scenario& sc, const std::string& out_root,
                       bool write_trajectory = true);

/// Output-root precedence: --out flag, then the scenario's "out" field, then
/// the GRADFLOW_OUT environment variable, then "./out".
std::string resolve_out_root(const std::string& cli_out, const Scenario& sc);

/// Reference metric values published for one gain configuration of a
/// benchmark table, in row order overshoot %, t_10, t_1, error %.
struct PublishedColumn {
  std::string label;
  double overshoot_pct = 0.0;
  double settle10 = 0.0;
  double settle1 = 0.0;
  double error_pct = 0.0;
};

/// One gain configuration of a benchmark table after running: the computed
/// worst-case metrics next to the published reference values.
struct TableColumn {
  PublishedColumn published;
  ScalarMetrics computed;  // the worst-case row of the run's report
  std::string run_id;
};

struct TableResult {
  std::string name;         // "table1" | "table2" | "table3"
  std::string description;  // problem and layout in words
  double dt = 0.0;
  double horizon = 0.0;
  std::vector<TableColumn> columns;
  std::string table_dir;  // empty when not written to disk
};

/// The published reference values for a benchmark table's four gain
/// configurations. Comparison data for display and acceptance only; never an
/// input to the computation.
std::vector<PublishedColumn> published_table(const std::string& name);

/// The scenarios a benchmark table runs: P with constant gain, P with fading
/// gain, I, and PI, over the table's problem and layout. dt/horizon override
/// the built-in defaults for all four.
std::vector<Scenario> table_scenarios(const std::string& name, std::optional<double> dt,
                                      std::optional<double> horizon);

/// Runs the four configurations (concurrently when hardware allows) and, when
/// out_root is non-empty, writes each run's manifest/metrics/oracle artifacts
/// plus the table summary (table.txt, table.csv) under
/// <out_root>/<name>-<id>/. Trajectory CSVs are skipped: table runs keep only
/// sampled z values, and their snapshots are dropped once metrics are out.
TableResult run_table(const std::string& name, std::optional<double> dt,
                      std::optional<double> horizon, const std::string& out_root);

/// Aligned text rendering with computed and published values side by side;
/// settling times that never left the band before the horizon print as "> T".
std::string format_table(const TableResult& table);

/// Machine-readable long form: one row per (configuration, metric) with
/// computed and published values.
std::string table_csv(const TableResult& table);

/// Human summary of a single run for the console.
std::string format_run_summary(const RunResult& result);

}  // namespace gradflow
