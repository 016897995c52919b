#include "blesim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "blesim/power.hpp"

namespace blesim {

using nlohmann::json;

namespace {

const std::vector<std::string>& supported_params() {
  static const std::vector<std::string> names = {
      "scan_interval_ms", "repeat_interval_ms", "nr_repeats",
      "sleep_time_ms",    "duty_cycle",         "node_period_ms",
      "noise_period_ms"};
  return names;
}

void apply_param(Scenario& s, const std::string& name, double value) {
  if (name == "scan_interval_ms") {
    // The scan window occupies the entire interval in all swept setups.
    s.relay.scan_interval_us = msec(static_cast<std::int64_t>(value));
    s.relay.scan_window_us = s.relay.scan_interval_us;
  } else if (name == "repeat_interval_ms") {
    if (s.relay.policy.type != PolicyType::Batching) {
      throw ScenarioError("sweep.repeat_interval_ms",
                          "only applies to the batching policy");
    }
    s.relay.policy.repeat_interval_us = msec(static_cast<std::int64_t>(value));
  } else if (name == "nr_repeats") {
    if (s.relay.policy.type != PolicyType::Batching) {
      throw ScenarioError("sweep.nr_repeats",
                          "only applies to the batching policy");
    }
    s.relay.policy.nr_repeats = static_cast<int>(value);
  } else if (name == "sleep_time_ms") {
    s.relay.sleep_time_us = msec(static_cast<std::int64_t>(value));
  } else if (name == "duty_cycle") {
    apply_duty_cycle(s, value);
  } else if (name == "node_period_ms") {
    for (NodeConfig& n : s.nodes) n.period_us = msec(static_cast<std::int64_t>(value));
  } else if (name == "noise_period_ms") {
    for (NodeConfig& n : s.noise_nodes) {
      n.period_us = msec(static_cast<std::int64_t>(value));
    }
  } else {
    throw ScenarioError("sweep." + name, "unsupported sweep parameter");
  }
}

std::string fmt_number(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_rate(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

struct ColumnSet {
  std::vector<std::string> extra_params;  // swept names with no standard column
  bool power = false;
};

ColumnSet columns_for(const SweepSpec& spec) {
  ColumnSet cols;
  cols.power = spec.power_columns;
  for (const SweepParam& p : spec.params) {
    if (p.name != "scan_interval_ms" && p.name != "repeat_interval_ms" &&
        p.name != "nr_repeats" && p.name != "duty_cycle") {
      cols.extra_params.push_back(p.name);
    }
    if (p.name == "duty_cycle") cols.power = true;
  }
  return cols;
}

std::vector<std::string> header_cells(const SweepSpec& spec, const ColumnSet& cols) {
  std::vector<std::string> h = cols.extra_params;
  h.insert(h.end(), {"scan_interval_ms", "repeat_interval_ms", "nr_repeats",
                     "duty_cycle", "listen_ratio", "nodes_to_relay",
                     "relay_to_gateway", "nodes_to_gateway", "seed"});
  if (cols.power) {
    h.push_back("battery_life_years");
    h.push_back("effective_rate");
  }
  (void)spec;
  return h;
}

std::vector<std::string> row_cells(const SweepSpec& spec, const ColumnSet& cols,
                                   const SweepRow& row,
                                   const Scenario& scenario,
                                   const std::string& seed_label) {
  std::vector<std::string> cells;
  for (const std::string& name : cols.extra_params) {
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
      if (spec.params[i].name == name) {
        cells.push_back(fmt_number(row.param_values[i]));
      }
    }
  }
  const RelayConfig& r = scenario.relay;
  const bool batching = r.policy.type == PolicyType::Batching;
  cells.push_back(fmt_number(static_cast<double>(r.scan_interval_us) / 1000.0));
  cells.push_back(fmt_number(
      batching ? static_cast<double>(r.policy.repeat_interval_us) / 1000.0 : 0));
  cells.push_back(fmt_number(batching ? r.policy.nr_repeats : 0));
  cells.push_back(fmt_rate(scenario.configured_duty()));
  cells.push_back(fmt_rate(row.report.listen_ratio));
  cells.push_back(fmt_rate(row.report.nodes_to_relay));
  cells.push_back(fmt_rate(row.report.relay_to_gateway));
  cells.push_back(fmt_rate(row.report.nodes_to_gateway));
  cells.push_back(seed_label.empty() ? std::to_string(row.report.seed)
                                     : seed_label);
  if (cols.power) {
    const double duty = scenario.configured_duty();
    cells.push_back(fmt_rate(battery_life_years(scenario.power.model, duty)));
    cells.push_back(fmt_rate(effective_rate(scenario.power.baseline_rate, duty)));
  }
  return cells;
}

// Sample mean / sample standard deviation (N-1) over present values.
std::pair<std::string, std::string> aggregate(
    const std::vector<std::optional<double>>& values) {
  std::vector<double> v;
  for (const auto& x : values) {
    if (x) v.push_back(*x);
  }
  if (v.empty()) return {"", ""};
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sd = 0;
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return {fmt_rate(mean), fmt_rate(sd)};
}

}  // namespace

SweepSpec parse_sweep(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("$", "sweep spec must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "base" && it.key() != "sweep" && it.key() != "repetitions" &&
        it.key() != "power_columns") {
      throw ScenarioError("$." + it.key(), "unknown key");
    }
  }
  SweepSpec spec;
  if (!doc.contains("base")) throw ScenarioError("base", "missing required key");
  spec.base = parse_scenario(doc["base"]);

  if (doc.contains("sweep")) {
    const json& sweep = doc["sweep"];
    if (!sweep.is_array()) {
      throw ScenarioError("sweep", "expected an array of {param, values}");
    }
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      const std::string path = "sweep[" + std::to_string(i) + "]";
      const json& entry = sweep[i];
      if (!entry.is_object() || !entry.contains("param") ||
          !entry.contains("values")) {
        throw ScenarioError(path, "expected {\"param\": ..., \"values\": [...]}");
      }
      SweepParam p;
      p.name = entry["param"].get<std::string>();
      if (std::find(supported_params().begin(), supported_params().end(),
                    p.name) == supported_params().end()) {
        throw ScenarioError(path + ".param", "unsupported parameter '" + p.name + "'");
      }
      for (const json& v : entry["values"]) p.values.push_back(v.get<double>());
      if (p.values.empty()) throw ScenarioError(path + ".values", "must be non-empty");
      spec.params.push_back(std::move(p));
    }
  }
  if (doc.contains("repetitions")) {
    spec.repetitions = doc["repetitions"].get<int>();
    if (spec.repetitions < 1) throw ScenarioError("repetitions", "must be >= 1");
  }
  if (doc.contains("power_columns")) {
    spec.power_columns = doc["power_columns"].get<bool>();
  }
  return spec;
}

SweepSpec parse_sweep_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_sweep(doc);
}

Scenario scenario_at(const SweepSpec& spec, const std::vector<double>& values,
                     int repetition) {
  Scenario s = spec.base;
  for (std::size_t i = 0; i < spec.params.size(); ++i) {
    apply_param(s, spec.params[i].name, values[i]);
  }
  s.seed = spec.base.seed + static_cast<std::uint64_t>(repetition);
  validate_scenario(s);
  return s;
}

namespace {

std::vector<std::vector<double>> expand_points(const SweepSpec& spec) {
  std::vector<std::vector<double>> points;
  std::vector<std::size_t> idx(spec.params.size(), 0);
  while (true) {
    std::vector<double> values;
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
      values.push_back(spec.params[i].values[idx[i]]);
    }
    points.push_back(values);
    // odometer increment, last parameter fastest
    std::size_t i = spec.params.size();
    while (i > 0) {
      --i;
      if (++idx[i] < spec.params[i].values.size()) break;
      idx[i] = 0;
      if (i == 0) return points;
    }
    if (spec.params.empty()) return points;
  }
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, int jobs, const RunOptions& opts) {
  const auto points = expand_points(spec);
  const std::size_t n_tasks = points.size() * spec.repetitions;

  SweepResult result;
  std::vector<std::optional<SweepRow>> rows(n_tasks);
  std::vector<RunResult> runs(n_tasks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;

  auto worker = [&] {
    while (!failed.load()) {
      const std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t point = task / spec.repetitions;
      const int rep = static_cast<int>(task % spec.repetitions);
      try {
        const Scenario s = scenario_at(spec, points[point], rep);
        RunResult run = run_scenario(s, opts);
        rows[task] = SweepRow{points[point], run.report};
        runs[task] = std::move(run);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) result.error = e.what();
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int n_threads = std::min<std::size_t>(jobs, std::max<std::size_t>(n_tasks, 1));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  result.aborted = failed.load();
  for (std::size_t i = 0; i < n_tasks; ++i) {
    if (!rows[i]) break;  // preserve the deterministic prefix on abort
    result.rows.push_back(std::move(*rows[i]));
    result.runs.push_back(std::move(runs[i]));
  }
  return result;
}

std::string sweep_to_csv(const SweepSpec& spec, const SweepResult& result) {
  const ColumnSet cols = columns_for(spec);
  std::ostringstream out;

  const auto header = header_cells(spec, cols);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << "\n";

  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << "\n";
  };

  // Rows arrive grouped by sweep point (repetitions are adjacent); aggregate
  // rows follow each complete group.
  std::size_t i = 0;
  while (i < result.rows.size()) {
    const std::size_t group_end =
        std::min(i + static_cast<std::size_t>(spec.repetitions), result.rows.size());
    std::vector<std::optional<double>> n2r, r2g, n2g;
    for (std::size_t k = i; k < group_end; ++k) {
      const SweepRow& row = result.rows[k];
      const Scenario s = scenario_at(spec, row.param_values,
                                     static_cast<int>(k - i));
      emit(row_cells(spec, cols, row, s, ""));
      n2r.push_back(row.report.nodes_to_relay);
      r2g.push_back(row.report.relay_to_gateway);
      n2g.push_back(row.report.nodes_to_gateway);
    }
    if (group_end - i == static_cast<std::size_t>(spec.repetitions)) {
      const Scenario s = scenario_at(spec, result.rows[i].param_values, 0);
      auto base = row_cells(spec, cols, result.rows[i], s, "mean");
      auto sd = row_cells(spec, cols, result.rows[i], s, "sd");
      const std::size_t off = cols.extra_params.size() + 5;  // rate columns
      const auto [m0, s0] = aggregate(n2r);
      const auto [m1, s1] = aggregate(r2g);
      const auto [m2, s2] = aggregate(n2g);
      base[off] = m0; base[off + 1] = m1; base[off + 2] = m2;
      sd[off] = s0; sd[off + 1] = s1; sd[off + 2] = s2;
      emit(base);
      emit(sd);
    }
    i = group_end;
  }
  if (result.aborted) {
    out << "# aborted: " << result.error << "\n";
  }
  return out.str();
}

namespace {

std::string align_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      out << row[i];
      for (std::size_t pad = row[i].size(); pad < widths[i]; ++pad) out << ' ';
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::string sweep_to_table(const SweepSpec& spec, const SweepResult& result) {
  const ColumnSet cols = columns_for(spec);
  std::vector<std::vector<std::string>> rows;
  rows.push_back(header_cells(spec, cols));
  std::istringstream csv(sweep_to_csv(spec, result));
  std::string line;
  std::getline(csv, line);  // header already added
  while (std::getline(csv, line)) {
    if (line.rfind("# ", 0) == 0) {
      rows.push_back({line});
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return align_table(rows);
}

std::string report_to_csv(const Scenario& s, const RateReport& report,
                          bool power_columns) {
  SweepSpec spec;
  spec.base = s;
  spec.repetitions = 1;
  spec.power_columns = power_columns;
  SweepResult result;
  result.rows.push_back(SweepRow{{}, report});
  return sweep_to_csv(spec, result);
}

std::string report_to_table(const Scenario& s, const RateReport& report) {
  std::vector<std::vector<std::string>> rows;
  auto rate = [](const std::optional<double>& v) { return fmt_rate(v); };
  rows.push_back({"metric", "value"});
  rows.push_back({"member_events_sent", std::to_string(report.member_events_sent)});
  rows.push_back({"echo_events_sent", std::to_string(report.echo_events_sent)});
  rows.push_back({"nodes_to_relay", rate(report.nodes_to_relay)});
  rows.push_back({"relay_to_gateway", rate(report.relay_to_gateway)});
  rows.push_back({"nodes_to_gateway", rate(report.nodes_to_gateway)});
  rows.push_back({"listen_ratio", fmt_rate(report.listen_ratio)});
  rows.push_back({"duty_cycle", fmt_rate(report.configured_duty)});
  rows.push_back({"measured_duty", fmt_rate(report.measured_duty)});

  auto losses = [&](const char* prefix, const ReceiverCounters& c) {
    rows.push_back({std::string(prefix) + "_received", std::to_string(c.received)});
    rows.push_back({std::string(prefix) + "_counted", std::to_string(c.counted)});
    rows.push_back({std::string(prefix) + "_duplicates", std::to_string(c.duplicates)});
    rows.push_back({std::string(prefix) + "_filtered", std::to_string(c.filtered)});
    rows.push_back({std::string(prefix) + "_lost_not_tuned",
                    std::to_string(c.losses.not_tuned)});
    rows.push_back({std::string(prefix) + "_lost_collision",
                    std::to_string(c.losses.collision)});
    rows.push_back({std::string(prefix) + "_lost_unreachable",
                    std::to_string(c.losses.unreachable)});
    rows.push_back({std::string(prefix) + "_lost_rx_busy",
                    std::to_string(c.losses.rx_busy)});
    rows.push_back({std::string(prefix) + "_lost_asleep",
                    std::to_string(c.losses.asleep)});
  };
  losses("relay", report.relay_counters);
  losses("gateway", report.gateway_counters);

  const double duty = report.configured_duty;
  rows.push_back({"battery_life_years",
                  fmt_rate(battery_life_years(s.power.model, duty))});
  rows.push_back({"effective_rate",
                  fmt_rate(effective_rate(s.power.baseline_rate, duty))});
  rows.push_back({"seed", std::to_string(report.seed)});
  return align_table(rows);
}

}  // namespace blesim
