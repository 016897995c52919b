#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blesim/link_matrix.hpp"
#include "blesim/power.hpp"
#include "blesim/sim_time.hpp"

#include <json.hpp>

namespace blesim {

// Validation failure with the path of the offending field, e.g.
// "relay.scan_window_ms".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RadioDefaults {
  std::int64_t airtime_us = 300;            // one ADV PDU on air
  std::int64_t inter_channel_gap_us = 400;  // gap between PDUs of one event
  bool adv_delay = true;                    // 0-10 ms jitter per period
};

struct NodeConfig {
  std::string id;
  std::int64_t period_us = sec(1);
  bool member = true;  // false: noise device, MAC-filtered at accounting
  std::optional<std::int64_t> airtime_us;
  std::optional<std::int64_t> inter_channel_gap_us;
  std::optional<bool> adv_delay;
};

enum class PolicyType { Immediate, Batching };

struct ForwardingPolicy {
  PolicyType type = PolicyType::Immediate;

  // Immediate. The physical relay sent a single PDU per forwarded packet;
  // set single_channel_echo=false for a full 3-channel echo event. After an
  // echo the relay stays idle until the next hop (one relayed packet per
  // scan interval) unless resume_listening_after_echo is set.
  bool single_channel_echo = true;
  bool resume_listening_after_echo = false;

  // Batching.
  std::int64_t listen_time_us = sec(10);  // S_Time
  int nr_repeats = 5;                     // Nr_Repeats
  std::int64_t repeat_interval_us = msec(10);  // R_Interval
  // If set, an origin heard k < Nr times gets k echoes instead of Nr.
  bool cap_repeats_at_count = false;
};

struct RelayConfig {
  std::string id = "relay";
  std::int64_t scan_interval_us = msec(50);  // per-channel dwell
  std::int64_t scan_window_us = msec(50);    // listening part of each dwell
  std::int64_t scan_time_us = sec(10);       // listening phase (immediate)
  std::int64_t sleep_time_us = 0;
  ForwardingPolicy policy;
  std::int64_t mode_switch_latency_us = 150;
  double duplicate_probability = 0.0;

  std::int64_t listen_phase_us() const {
    return policy.type == PolicyType::Batching ? policy.listen_time_us
                                               : scan_time_us;
  }
};

struct GatewayConfig {
  std::string id = "gateway";
  std::int64_t scan_interval_us = msec(50);
  std::int64_t scan_window_us = msec(50);
  std::int64_t processing_dead_time_us = 1000;
};

// Adjacency entry. from/to are device ids or the aliases "nodes", "noise",
// "relay", "gateway", "*". Later rules override earlier ones; pairs no rule
// touches keep the default topology (nodes and noise reach relay and
// gateway, relay reaches gateway).
struct LinkRule {
  std::string from;
  std::string to;
  double p = 1.0;
};

struct AccountingConfig {
  bool strict_origin_dedup = false;
  std::int64_t dedup_horizon_us = msec(20);
};

struct PowerConfig {
  PowerModel model;
  // Full-duty forwarding efficiency used for the effective_rate CSV column.
  double baseline_rate = 0.35;
};

struct Scenario {
  std::int64_t duration_us = sec(600);
  std::uint64_t seed = 1;
  std::vector<NodeConfig> nodes;        // member == true
  std::vector<NodeConfig> noise_nodes;  // member == false
  RelayConfig relay;
  GatewayConfig gateway;
  std::vector<LinkRule> links;
  RadioDefaults radio;
  AccountingConfig accounting;
  PowerConfig power;

  // Nominal active time of one relay cycle (listen phase plus the planned
  // batching forwarding phase) and the resulting configured duty cycle.
  std::int64_t nominal_active_us() const;
  double configured_duty() const;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
nlohmann::json emit_scenario(const Scenario& s);

// Throws ScenarioError on the first violated invariant.
void validate_scenario(const Scenario& s);

// Expands defaults and rules into a concrete matrix over the device order
// [members..., noise..., relay, gateway].
LinkMatrix build_link_matrix(const Scenario& s);

// Sets sleep_time so that nominal_active / (nominal_active + sleep) == duty.
void apply_duty_cycle(Scenario& s, double duty);

}  // namespace blesim
