#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blesim/ledger.hpp"
#include "blesim/medium.hpp"
#include "blesim/scenario.hpp"
#include "blesim/sim_time.hpp"

namespace blesim {

struct RateReport {
  std::optional<double> nodes_to_relay;
  std::optional<double> relay_to_gateway;
  std::optional<double> nodes_to_gateway;
  double listen_ratio = 1.0;       // Eq.-style ratio from the configuration
  double configured_duty = 1.0;    // nominal active / (active + sleep)
  double measured_duty = 1.0;      // non-sleep time fraction from the trace

  std::uint64_t member_events_sent = 0;
  std::uint64_t echo_events_sent = 0;
  ReceiverCounters relay_counters;
  ReceiverCounters gateway_counters;
  std::uint64_t gateway_echo_events = 0;
  std::uint64_t gateway_direct_events = 0;

  std::uint64_t seed = 0;
  SimTime duration_us = 0;
};

struct RunOptions {
  bool collect_trace = false;
  bool collect_state_logs = false;  // per-device radio state transitions
};

struct DeviceStateLog {
  std::string name;
  std::vector<StateChange> changes;
};

struct RunResult {
  RateReport report;
  std::vector<std::string> trace_lines;       // time_us\tdevice\tkind\tdetail
  std::vector<DeviceStateLog> state_logs;     // when collect_state_logs
  std::uint64_t events_dispatched = 0;
  std::uint64_t events_scheduled = 0;
};

RunResult run_scenario(const Scenario& scenario, const RunOptions& opts = {});

}  // namespace blesim
