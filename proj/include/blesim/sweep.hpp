#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blesim/scenario.hpp"
#include "blesim/sim.hpp"

#include <json.hpp>

namespace blesim {

// One swept parameter with an explicit value list. Supported names:
// scan_interval_ms (sets window too), repeat_interval_ms, nr_repeats,
// sleep_time_ms, duty_cycle, node_period_ms, noise_period_ms.
struct SweepParam {
  std::string name;
  std::vector<double> values;
};

struct SweepSpec {
  Scenario base;
  std::vector<SweepParam> params;  // cartesian product, first is outermost
  int repetitions = 3;             // seeds per sweep point
  bool power_columns = false;
};

SweepSpec parse_sweep(const nlohmann::json& doc);
SweepSpec parse_sweep_text(const std::string& text);

// Returns the scenario for one sweep point (seed = base seed + repetition).
Scenario scenario_at(const SweepSpec& spec, const std::vector<double>& values,
                     int repetition);

struct SweepRow {
  std::vector<double> param_values;
  RateReport report;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // one per (point, seed), deterministic order
  bool aborted = false;
  std::string error;           // first worker fault, when aborted
  std::vector<RunResult> runs; // full run results, same order as rows
};

// Runs every (point, seed) pair across `jobs` share-nothing workers.
// Results are identical whether points run serially or in parallel.
SweepResult run_sweep(const SweepSpec& spec, int jobs,
                      const RunOptions& opts = {});

// CSV with one row per (point, seed) plus mean/sd aggregate rows per point.
// Deterministic: identical spec yields byte-identical text. On an aborted
// sweep the completed rows are preserved and a marker row is appended.
std::string sweep_to_csv(const SweepSpec& spec, const SweepResult& result);

// Aligned human-readable table over the same rows.
std::string sweep_to_table(const SweepSpec& spec, const SweepResult& result);

// Single-run helpers used by the CLI.
std::string report_to_csv(const Scenario& s, const RateReport& report,
                          bool power_columns);
std::string report_to_table(const Scenario& s, const RateReport& report);

}  // namespace blesim
