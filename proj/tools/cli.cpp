#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "ooe/engine.hpp"
#include "ooe/feasibility.hpp"
#include "ooe/gantt.hpp"
#include "ooe/scenario_json.hpp"

namespace ooe::cli {

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kMiss = 2;
constexpr int kFault = 3;
constexpr int kViolation = 4;
constexpr int kRefused = 5;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("error writing " + path);
}

void report(const ScenarioError& e) {
  for (const auto& d : e.diagnostics()) std::cerr << "error: " << d << '\n';
}

int cmd_run(const std::string& scenario_path, const std::string& trace_path,
            const std::string& metrics_path, bool verbose) {
  const Scenario sc = load_scenario(scenario_path);
  const RunResult res = run_scenario(sc);

  if (verbose) {
    for (const auto& r : res.trace.records())
      if (r.kind == RecordKind::IplSet || r.kind == RecordKind::TimerSet)
        std::cerr << r.time << ' ' << to_string(r.kind) << ' '
                  << (r.line ? std::to_string(r.line->value) : "-") << ' '
                  << r.detail << '\n';
  }
  if (!trace_path.empty()) write_file(trace_path, trace_to_csv(res.trace));
  if (!metrics_path.empty()) write_file(metrics_path, metrics_to_json(res.metrics));

  const auto& m = res.metrics;
  std::uint64_t drops = 0;
  for (const auto& [id, t] : m.tasks) drops += t.drops;
  const auto faults = m.alarm_count(AlarmKind::SensorFault);
  std::cout << "horizon " << m.horizon << ": " << res.trace.size()
            << " records, " << m.total_misses() << " misses, " << drops
            << " drops, " << m.alarms.size() << " alarms (" << faults
            << " sensor faults)\n";
  if (m.total_misses() > 0) return kMiss;
  if (faults > 0) return kFault;
  return kOk;
}

std::string join_times(const std::vector<Tick>& v) {
  std::string s;
  for (Tick t : v) s += (s.empty() ? "" : " ") + std::to_string(t);
  return s;
}

int cmd_check(const std::string& scenario_path, std::optional<Tick> horizon,
              std::string witness_path) {
  const Scenario sc = load_scenario(scenario_path);
  FeasibilityResult res;
  try {
    res = check_ooe_feasible(sc, Bounds{}, horizon);
  } catch (const BoundsExceeded& e) {
    std::cout << "refused: " << e.what() << '\n';
    return kRefused;
  }
  if (res.feasible) {
    std::cout << "Feasible (" << res.patterns_checked << " release patterns)\n";
    return kOk;
  }

  const Tick h = horizon.value_or(hyperperiod(sc.tasks));
  const auto& job = *res.offending;
  const auto& task = sc.tasks.tasks[job.task];
  std::cout << "Violation: " << task.id << " job " << job.seq + 1
            << " missed its deadline at t=" << *job.finished << " (pattern #"
            << *res.pattern_index << (*res.pattern_index == 0 ? ", normal" : "")
            << ")\n";
  for (std::size_t i = 0; i < sc.tasks.tasks.size(); ++i)
    std::cout << "  " << sc.tasks.tasks[i].id << ": "
              << join_times(res.pattern[i]) << '\n';

  if (witness_path.empty()) witness_path = scenario_path + ".witness.csv";
  const RunResult replay = run_scenario(pattern_scenario(sc, res.pattern, h));
  write_file(witness_path, trace_to_csv(replay.trace));
  std::cout << "witness trace: " << witness_path << '\n';
  return kViolation;
}

int cmd_gantt(const std::string& trace_path, const std::string& out_path,
              const std::string& format) {
  std::ifstream in(trace_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << trace_path << '\n';
    return kError;
  }
  Trace trace;
  try {
    trace = read_trace_csv(in);
  } catch (const TraceParseError& e) {
    std::cerr << "error: " << trace_path << ": " << e.what() << '\n';
    return kError;
  }
  const auto rows = gantt_rows(trace);
  write_file(out_path, format == "svg" ? gantt_svg(rows) : gantt_csv(rows));
  return kOk;
}

int cmd_generate(const std::string& scenario_path, std::optional<Tick> horizon,
                 std::optional<std::uint32_t> line) {
  const Scenario sc = load_scenario(scenario_path);
  const Tick h = horizon.value_or(effective_horizon(sc));
  for (const auto& w : sc.workload) {
    if (line && w.line.value != *line) continue;
    std::cout << "line " << w.line.value << ": "
              << join_times(generate_workload(w, h, sc.seed)) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv) {
  CLI::App app{"Out-of-envelope interrupt handling simulator", "ooesim"};
  app.require_subcommand(1);

  std::string scenario, trace, metrics, out, format = "csv", witness;
  std::optional<Tick> horizon;
  std::optional<std::uint32_t> line;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Simulate a scenario");
  run->add_option("--scenario", scenario, "Scenario JSON")->required();
  run->add_option("--trace", trace, "Trace CSV output");
  run->add_option("--metrics", metrics, "Metrics JSON output");
  run->add_flag("--verbose", verbose, "Echo IPL_SET and TIMER_SET records to stderr");

  auto* check = app.add_subcommand("check", "Exhaustive out-of-envelope feasibility check");
  check->add_option("--scenario", scenario, "Scenario JSON")->required();
  check->add_option("--horizon", horizon, "Pattern horizon (default: hyperperiod)");
  check->add_option("--witness", witness,
                    "Witness trace output (default: <scenario>.witness.csv)");

  auto* gantt = app.add_subcommand("gantt", "Render a trace as gantt rows");
  gantt->add_option("--trace", trace, "Trace CSV")->required();
  gantt->add_option("--out", out, "Output file")->required();
  gantt->add_option("--format", format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}));

  auto* generate = app.add_subcommand("generate", "Print generated raise times");
  generate->add_option("--scenario", scenario, "Scenario JSON")->required();
  generate->add_option("--horizon", horizon, "Override the horizon");
  generate->add_option("--line", line, "Only this line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*run) return cmd_run(scenario, trace, metrics, verbose);
    if (*check) return cmd_check(scenario, horizon, witness);
    if (*gantt) return cmd_gantt(trace, out, format);
    if (*generate) return cmd_generate(scenario, horizon, line);
  } catch (const ScenarioError& e) {
    report(e);
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace ooe::cli
