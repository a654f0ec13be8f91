#include "gradflow/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "gradflow/errors.hpp"

namespace gradflow {
namespace {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void put_number(std::ofstream& out, double v) {
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.write(buf, len);
}

void finish_file(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw ValidationError("failed writing \"" + path.string() + "\"");
}

/// Sum of per-agent gradients scattered onto the tracked copies of z (each
/// agent differentiates at its own copies). Used for the Laplacian-form
/// stationarity certificate.
void stacked_gradient(const SeparableCost& cost, const AggregateLayout& layout,
                      const std::vector<double>& z, std::vector<double>& out) {
  out.assign(static_cast<size_t>(layout.z_dim), 0.0);
  std::vector<double> x_dep, g_dep;
  for (int i = 0; i < cost.agent_count(); ++i) {
    const std::vector<int>& dep = cost.dependency(i);
    x_dep.resize(dep.size());
    g_dep.resize(dep.size());
    for (size_t k = 0; k < dep.size(); ++k)
      x_dep[k] = z[static_cast<size_t>(layout.z_index(i, dep[k]))];
    cost.agents[static_cast<size_t>(i)]->gradient_dep(x_dep.data(), g_dep.data());
    for (size_t k = 0; k < dep.size(); ++k)
      out[static_cast<size_t>(layout.z_index(i, dep[k]))] += g_dep[k];
  }
}

void write_manifest(const fs::path& dir, const Scenario& sc) {
  const fs::path path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");
  out << scenario_manifest(sc);
  finish_file(out, path);
}

void write_trajectory_csv(const fs::path& dir, const Trajectory& tr) {
  const fs::path path = dir / "trajectory.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");

  const size_t z_dim = tr.states.empty() ? tr.final_state.z.size() : tr.states[0].z.size();
  const size_t mu_dim = tr.states.empty() ? 0 : tr.states[0].mu.size();
  out << "time";
  for (size_t i = 0; i < z_dim; ++i) out << ",z[" << i << "]";
  for (size_t i = 0; i < mu_dim; ++i) out << ",mu[" << i << "]";
  out << "\n";
  for (size_t s = 0; s < tr.states.size(); ++s) {
    put_number(out, tr.times[s]);
    for (const double v : tr.states[s].z) {
      out.put(',');
      put_number(out, v);
    }
    for (const double v : tr.states[s].mu) {
      out.put(',');
      put_number(out, v);
    }
    out.put('\n');
  }
  finish_file(out, path);
}

void write_metric_row(std::ofstream& out, const std::string& series, const std::string& agent,
                      const std::string& variable, const ScalarMetrics& m) {
  out << series << ',' << agent << ',' << variable << ',';
  put_number(out, m.overshoot_pct);
  out.put(',');
  put_number(out, m.settle10);
  out << ',' << (m.settle10_at_horizon ? 1 : 0) << ',';
  put_number(out, m.settle1);
  out << ',' << (m.settle1_at_horizon ? 1 : 0) << ',';
  put_number(out, m.error_pct);
  out.put(',');
  put_number(out, m.x0);
  out.put(',');
  put_number(out, m.xf);
  out.put(',');
  put_number(out, m.xmax);
  out << ',' << (m.degenerate ? 1 : 0) << '\n';
}

void write_metrics_csv(const fs::path& dir, const WorstCaseReport& report) {
  const fs::path path = dir / "metrics.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");
  out << "series,agent,variable,overshoot_pct,settle10,settle10_at_horizon,settle1,"
         "settle1_at_horizon,error_pct,x0,xf,xmax,degenerate\n";
  for (const MetricEntry& e : report.entries) {
    const std::string agent = std::to_string(e.agent);
    const std::string variable = std::to_string(e.variable);
    write_metric_row(out, "agent" + agent + "_var" + variable, agent, variable, e.metrics);
  }
  write_metric_row(out, "worst", "", "", report.worst);
  finish_file(out, path);
}

void write_oracle_json(const fs::path& dir, const RunResult& result) {
  nlohmann::json j;
  j["x_star"] = result.oracle.x_star;
  j["f_star"] = result.oracle.f_star;
  j["solver"] = result.oracle.method == OracleMethod::analytic ? "analytic" : "numeric";
  j["gradient_residual"] = result.oracle.residual;
  nlohmann::json fin;
  fin["time"] = result.trajectory.final_time;
  fin["reason"] = result.trajectory.reason == StopReason::horizon ? "horizon" : "residual";
  fin["consensus_residual"] = result.consensus_residual;
  if (result.stationarity_residual)
    fin["stationarity_residual"] = *result.stationarity_residual;
  else
    fin["stationarity_residual"] = nullptr;
  fin["optimality_gap"] = result.optimality_gap;
  j["final_state"] = fin;

  const fs::path path = dir / "oracle.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write \"" + path.string() + "\"");
  out << j.dump(2) << "\n";
  finish_file(out, path);
}

void write_run_artifacts(RunResult& result, const fs::path& root, bool write_trajectory) {
  const fs::path dir = root / ("run-" + result.run_id);
  fs::create_directories(dir);
  write_manifest(dir, result.scenario);
  if (write_trajectory) write_trajectory_csv(dir, result.trajectory);
  write_metrics_csv(dir, result.metrics);
  write_oracle_json(dir, result);
  result.run_dir = dir.string();
}

std::string fmt2(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_settle(double v, bool at_horizon) {
  if (!at_horizon) return fmt2(v);
  char buf[40];
  std::snprintf(buf, sizeof buf, "> %g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fmt_exp(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::string run_id(const Scenario& sc) { return hex16(fnv1a(scenario_manifest(sc))); }

RunResult execute_scenario(const Scenario& sc) {
  RunResult result;
  result.scenario = sc;
  result.run_id = run_id(sc);

  const auto layout = std::make_shared<const AggregateLayout>(build_layout(sc));
  MethodSpec spec;
  spec.method = sc.method;
  spec.gains = sc.gains;
  spec.layout = layout;
  validate_method_spec(spec);

  const auto cost = std::make_shared<const SeparableCost>(sc.problem.cost);
  const Flow flow(spec, cost);
  const FlowState initial = sc.z0.empty() ? flow.initial_state() : flow.initial_state(sc.z0);

  result.trajectory = integrate(
      [&flow](const FlowState& s, double t, FlowState& ds) { flow.rhs(s, t, ds); }, initial,
      sc.integrator);

  result.oracle = solve_consensus_optimum(sc.problem.cost);
  result.metrics = report(result.trajectory, *layout, result.oracle.x_star);

  const FlowState& fin = result.trajectory.final_state;
  result.consensus_residual = consensus_residual(*layout, fin.z);
  result.optimality_gap = optimality_gap(fin.z, result.oracle.x_star, *layout);
  if (sc.method == Method::I || sc.method == Method::PI) {
    result.stationarity_residual =
        kkt_residual(sc.problem.cost, *layout, fin.z, fin.mu, sc.gains,
                     result.trajectory.final_time)
            .second;
  } else if (sc.method == Method::PIL) {
    std::vector<double> grad, lap_mu(static_cast<size_t>(layout->z_dim), 0.0);
    stacked_gradient(sc.problem.cost, *layout, fin.z, grad);
    layout->apply_laplacian(fin.mu, lap_mu);
    double sq = 0.0;
    for (int i = 0; i < layout->z_dim; ++i) {
      const double v = grad[static_cast<size_t>(i)] + lap_mu[static_cast<size_t>(i)];
      sq += v * v;
    }
    result.stationarity_residual = std::sqrt(sq);
  }
  return result;
}

RunResult run_scenario(const Scenario& sc, const std::string& out_root, bool write_trajectory) {
  RunResult result = execute_scenario(sc);
  write_run_artifacts(result, fs::path(out_root), write_trajectory);
  return result;
}

std::string resolve_out_root(const std::string& cli_out, const Scenario& sc) {
  if (!cli_out.empty()) return cli_out;
  if (!sc.out.empty()) return sc.out;
  if (const char* env = std::getenv("GRADFLOW_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

std::vector<PublishedColumn> published_table(const std::string& name) {
  if (name == "table1")
    return {{"P (kG=1)", 0.11, 3.54, 6.66, 43.58},
            {"P (fading kG)", 34.66, 103.73, 869.32, 1.97},
            {"I", 24.24, 5.61, 15.04, 0.0},
            {"PI", 14.95, 5.14, 13.19, 0.0}};
  if (name == "table2")
    return {{"P (kG=1)", 0.1, 120.8, 226.58, 55.4},
            {"P (fading kG)", 0.12, 659.42, 4884.8, 0.92},
            {"I", 37.5, 115.28, 542.71, 0.0},
            {"PI", 7.9, 29.78, 83.02, 0.0}};
  if (name == "table3")
    return {{"P (kG=1)", 0.1, 5.2, 9.47, 57.48},
            {"P (fading kG)", 35.15, 82.85, 692.57, 5.3},
            {"I", 7.12, 6.12, 12.78, 0.0},
            {"PI", 4.51, 6.03, 12.33, 0.0}};
  throw ValidationError("unknown table \"" + name + "\" (expected table1, table2, or table3)");
}

std::vector<Scenario> table_scenarios(const std::string& name, std::optional<double> dt,
                                      std::optional<double> horizon) {
  const char* problem = nullptr;
  if (name == "table1")
    problem = "line3";
  else if (name == "table2")
    problem = "ring20";
  else if (name == "table3")
    problem = "ring20-reduced";
  else
    throw ValidationError("unknown table \"" + name + "\" (expected table1, table2, or table3)");

  Scenario base = built_in_scenario(problem);
  if (dt) base.integrator.dt = *dt;
  if (horizon) base.integrator.horizon = *horizon;
  base.integrator.record_multipliers = false;  // table runs keep z-only snapshots

  std::vector<Scenario> runs(4, base);
  runs[0].method = Method::P;
  runs[1].method = Method::P;
  runs[1].gains.fading = FadingGain{1.0, 0.1};
  runs[2].method = Method::I;
  runs[3].method = Method::PI;
  return runs;
}

TableResult run_table(const std::string& name, std::optional<double> dt,
                      std::optional<double> horizon, const std::string& out_root) {
  const std::vector<PublishedColumn> published = published_table(name);
  const std::vector<Scenario> scenarios = table_scenarios(name, dt, horizon);

  TableResult table;
  table.name = name;
  if (name == "table1")
    table.description = "three-agent path, full layout (6 state copies)";
  else if (name == "table2")
    table.description = "20-agent ring, full layout (400 state copies)";
  else
    table.description = "20-agent ring, reduced layout (60 state copies)";
  table.dt = scenarios[0].integrator.dt;
  table.horizon = scenarios[0].integrator.horizon;

  const size_t count = scenarios.size();
  std::vector<RunResult> results(count);
  std::vector<std::exception_ptr> errors(count);

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  size_t workers = std::min<size_t>(count, hw);
  // Full-ring snapshots are large; keep at most two trajectories resident.
  if (name == "table2") workers = std::min<size_t>(workers, 2);

  std::atomic<size_t> next{0};
  const auto work = [&]() {
    for (size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        RunResult r = execute_scenario(scenarios[i]);
        // Snapshots are no longer needed once the metrics are out; drop them
        // so concurrent table runs stay within memory.
        r.trajectory.states.clear();
        r.trajectory.states.shrink_to_fit();
        r.trajectory.times.clear();
        r.trajectory.times.shrink_to_fit();
        results[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::string combined;
  for (size_t i = 0; i < count; ++i) {
    TableColumn col;
    col.published = published[i];
    col.computed = results[i].metrics.worst;
    col.run_id = results[i].run_id;
    table.columns.push_back(col);
    combined += results[i].run_id;
  }

  if (!out_root.empty()) {
    const fs::path dir = fs::path(out_root) / (name + "-" + hex16(fnv1a(combined)));
    fs::create_directories(dir);
    for (RunResult& r : results) write_run_artifacts(r, dir, /*write_trajectory=*/false);

    const fs::path txt = dir / "table.txt";
    std::ofstream tout(txt, std::ios::binary);
    if (!tout) throw ValidationError("cannot write \"" + txt.string() + "\"");
    tout << format_table(table);
    finish_file(tout, txt);

    const fs::path csv = dir / "table.csv";
    std::ofstream cout_file(csv, std::ios::binary);
    if (!cout_file) throw ValidationError("cannot write \"" + csv.string() + "\"");
    cout_file << table_csv(table);
    finish_file(cout_file, csv);

    table.table_dir = dir.string();
  }
  return table;
}

std::string format_table(const TableResult& table) {
  std::ostringstream out;
  out << table.name << " - " << table.description << "\n";
  out << "rk4-sampled worst case over tracked scalars, dt = " << fmt_short(table.dt)
      << ", horizon = " << fmt_short(table.horizon) << "\n";
  out << "\"pub\" columns are the published reference values; \"> T\" means the"
         " band was not held before the horizon\n\n";

  constexpr int label_w = 13;
  constexpr int cell_w = 10;
  out << std::left << std::setw(label_w) << "metric";
  for (const TableColumn& c : table.columns)
    out << " | " << std::left << std::setw(2 * cell_w + 1) << c.published.label;
  out << "\n" << std::left << std::setw(label_w) << "";
  for (size_t i = 0; i < table.columns.size(); ++i)
    out << " | " << std::right << std::setw(cell_w) << "run" << " " << std::setw(cell_w)
        << "pub";
  out << "\n";

  const auto row = [&](const char* label, auto computed, auto published) {
    out << std::left << std::setw(label_w) << label;
    for (const TableColumn& c : table.columns)
      out << " | " << std::right << std::setw(cell_w) << computed(c) << " "
          << std::setw(cell_w) << published(c);
    out << "\n";
  };
  row(
      "overshoot %",
      [](const TableColumn& c) {
        return c.computed.degenerate ? std::string("n/a") : fmt2(c.computed.overshoot_pct);
      },
      [](const TableColumn& c) { return fmt2(c.published.overshoot_pct); });
  row(
      "t_10",
      [](const TableColumn& c) {
        return c.computed.degenerate
                   ? std::string("n/a")
                   : fmt_settle(c.computed.settle10, c.computed.settle10_at_horizon);
      },
      [](const TableColumn& c) { return fmt2(c.published.settle10); });
  row(
      "t_1",
      [](const TableColumn& c) {
        return c.computed.degenerate
                   ? std::string("n/a")
                   : fmt_settle(c.computed.settle1, c.computed.settle1_at_horizon);
      },
      [](const TableColumn& c) { return fmt2(c.published.settle1); });
  row(
      "error %",
      [](const TableColumn& c) {
        return c.computed.degenerate ? std::string("n/a") : fmt2(c.computed.error_pct);
      },
      [](const TableColumn& c) { return fmt2(c.published.error_pct); });
  return out.str();
}

std::string table_csv(const TableResult& table) {
  std::ostringstream out;
  out << "configuration,metric,computed,published,computed_at_horizon\n";
  char buf[40];
  const auto row = [&](const std::string& config, const char* metric, double computed,
                       double published, int at_horizon) {
    std::snprintf(buf, sizeof buf, "%.17g", computed);
    out << config << ',' << metric << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%g", published);
    out << buf << ',';
    if (at_horizon >= 0) out << at_horizon;
    out << '\n';
  };
  for (const TableColumn& c : table.columns) {
    row(c.published.label, "overshoot_pct", c.computed.overshoot_pct,
        c.published.overshoot_pct, -1);
    row(c.published.label, "settle10", c.computed.settle10, c.published.settle10,
        c.computed.settle10_at_horizon ? 1 : 0);
    row(c.published.label, "settle1", c.computed.settle1, c.published.settle1,
        c.computed.settle1_at_horizon ? 1 : 0);
    row(c.published.label, "error_pct", c.computed.error_pct, c.published.error_pct, -1);
  }
  return out.str();
}

std::string format_run_summary(const RunResult& result) {
  const Scenario& sc = result.scenario;
  std::ostringstream out;
  out << "run " << result.run_id << "\n";
  out << "  " << method_name(sc.method) << " on " << sc.problem_name << " ("
      << (sc.layout_mode == LayoutMode::full ? "full" : "reduced") << " layout, "
      << sc.problem.cost.agent_count() << " agents, " << sc.problem.cost.variable_count
      << " variables), " << scheme_name(sc.integrator.scheme)
      << " dt = " << fmt_short(sc.integrator.dt) << "\n";
  out << "  finished at t = " << fmt_short(result.trajectory.final_time) << " ("
      << (result.trajectory.reason == StopReason::horizon ? "horizon" : "residual stop")
      << ")\n";
  const ScalarMetrics& w = result.metrics.worst;
  if (w.degenerate) {
    out << "  worst case: every tracked scalar stayed at its initial value\n";
  } else {
    out << "  worst case over " << result.metrics.entries.size()
        << " tracked scalars: overshoot " << fmt2(w.overshoot_pct) << " %, t_10 "
        << (w.settle10_at_horizon ? "> " + fmt_short(w.settle10) : "= " + fmt2(w.settle10))
        << ", t_1 "
        << (w.settle1_at_horizon ? "> " + fmt_short(w.settle1) : "= " + fmt2(w.settle1))
        << ", error " << fmt2(w.error_pct) << " %\n";
  }
  out << "  certificates: consensus " << fmt_exp(result.consensus_residual);
  if (result.stationarity_residual)
    out << ", stationarity " << fmt_exp(*result.stationarity_residual);
  out << ", optimality gap " << fmt_exp(result.optimality_gap) << "\n";
  out << "  oracle: " << (result.oracle.method == OracleMethod::analytic ? "analytic" : "numeric")
      << " optimum, f* = " << fmt_short(result.oracle.f_star) << "\n";
  if (!result.run_dir.empty()) out << "  artifacts: " << result.run_dir << "\n";
  return out.str();
}

}  // namespace gradflow
