#include "blesim/scenario.hpp"

#include <algorithm>
#include <set>

namespace blesim {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end()) {
      throw ScenarioError(path + "." + it.key(), "unknown key");
    }
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ScenarioError(path + "." + key, "missing required key");
  }
  return *it;
}

std::int64_t get_i64(const json& obj, const std::string& path, const char* key,
                     std::int64_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) {
    throw ScenarioError(path + "." + key, "expected an integer");
  }
  return it->get<std::int64_t>();
}

double get_num(const json& obj, const std::string& path, const char* key,
               double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ScenarioError(path + "." + key, "expected a number");
  return it->get<double>();
}

bool get_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ScenarioError(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const char* key,
                    const std::string& fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ScenarioError(path + "." + key, "expected a string");
  return it->get<std::string>();
}

NodeConfig parse_node(const json& obj, const std::string& path, bool member,
                      const std::string& default_id) {
  reject_unknown_keys(obj, path,
                      {"id", "period_ms", "airtime_us", "inter_channel_gap_us",
                       "adv_delay"});
  NodeConfig n;
  n.id = get_str(obj, path, "id", default_id);
  n.member = member;
  n.period_us = msec(get_i64(obj, path, "period_ms", 1000));
  if (obj.contains("airtime_us")) n.airtime_us = get_i64(obj, path, "airtime_us", 0);
  if (obj.contains("inter_channel_gap_us")) {
    n.inter_channel_gap_us = get_i64(obj, path, "inter_channel_gap_us", 0);
  }
  if (obj.contains("adv_delay")) n.adv_delay = get_bool(obj, path, "adv_delay", true);
  return n;
}

// Node sections accept an explicit array or a {"count": N, ...} shorthand.
std::vector<NodeConfig> parse_node_list(const json& val, const std::string& path,
                                        bool member, const char* id_prefix) {
  std::vector<NodeConfig> out;
  if (val.is_array()) {
    for (std::size_t i = 0; i < val.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      out.push_back(parse_node(val[i], p, member,
                               std::string(id_prefix) + std::to_string(i + 1)));
    }
  } else if (val.is_object() && val.contains("count")) {
    json tmpl = val;
    const std::int64_t count = get_i64(val, path, "count", 0);
    if (count < 0) throw ScenarioError(path + ".count", "must be >= 0");
    tmpl.erase("count");
    for (std::int64_t i = 0; i < count; ++i) {
      out.push_back(parse_node(tmpl, path, member,
                               std::string(id_prefix) + std::to_string(i + 1)));
    }
  } else {
    throw ScenarioError(path, "expected an array or {\"count\": N, ...}");
  }
  return out;
}

ForwardingPolicy parse_policy(const json& obj, const std::string& path) {
  ForwardingPolicy p;
  const std::string type = get_str(obj, path, "type", "");
  if (type == "immediate") {
    reject_unknown_keys(obj, path,
                        {"type", "single_channel_echo",
                         "resume_listening_after_echo"});
    p.type = PolicyType::Immediate;
    p.single_channel_echo = get_bool(obj, path, "single_channel_echo", true);
    p.resume_listening_after_echo =
        get_bool(obj, path, "resume_listening_after_echo", false);
  } else if (type == "batching") {
    reject_unknown_keys(obj, path,
                        {"type", "listen_time_ms", "nr_repeats",
                         "repeat_interval_ms", "cap_repeats_at_count"});
    p.type = PolicyType::Batching;
    p.listen_time_us = msec(get_i64(obj, path, "listen_time_ms", 10000));
    p.nr_repeats = static_cast<int>(get_i64(obj, path, "nr_repeats", 5));
    p.repeat_interval_us = msec(get_i64(obj, path, "repeat_interval_ms", 10));
    p.cap_repeats_at_count = get_bool(obj, path, "cap_repeats_at_count", false);
  } else {
    throw ScenarioError(path + ".type", "must be \"immediate\" or \"batching\"");
  }
  return p;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ScenarioError("$", "scenario must be a JSON object");
  reject_unknown_keys(doc, "$",
                      {"duration_s", "seed", "nodes", "noise_nodes", "relay",
                       "gateway", "links", "radio", "accounting", "power"});
  Scenario s;
  s.duration_us = sec(get_i64(doc, "$", "duration_s", 600));
  s.seed = static_cast<std::uint64_t>(get_i64(doc, "$", "seed", 1));

  s.nodes = parse_node_list(require(doc, "$", "nodes"), "nodes", true, "n");
  if (doc.contains("noise_nodes")) {
    s.noise_nodes =
        parse_node_list(doc["noise_nodes"], "noise_nodes", false, "noise");
  }

  if (doc.contains("relay")) {
    const json& r = doc["relay"];
    const std::string path = "relay";
    reject_unknown_keys(r, path,
                        {"id", "scan_interval_ms", "scan_window_ms",
                         "scan_time_ms", "sleep_time_ms", "policy",
                         "mode_switch_latency_us", "duplicate_probability"});
    s.relay.id = get_str(r, path, "id", "relay");
    s.relay.scan_interval_us = msec(get_i64(r, path, "scan_interval_ms", 50));
    s.relay.scan_window_us =
        r.contains("scan_window_ms")
            ? msec(get_i64(r, path, "scan_window_ms", 50))
            : s.relay.scan_interval_us;
    s.relay.scan_time_us = msec(get_i64(r, path, "scan_time_ms", 10000));
    s.relay.sleep_time_us = msec(get_i64(r, path, "sleep_time_ms", 0));
    if (r.contains("policy")) s.relay.policy = parse_policy(r["policy"], "relay.policy");
    s.relay.mode_switch_latency_us =
        get_i64(r, path, "mode_switch_latency_us", 150);
    s.relay.duplicate_probability = get_num(r, path, "duplicate_probability", 0.0);
  }

  if (doc.contains("gateway")) {
    const json& g = doc["gateway"];
    const std::string path = "gateway";
    reject_unknown_keys(g, path,
                        {"id", "scan_interval_ms", "scan_window_ms",
                         "processing_dead_time_us"});
    s.gateway.id = get_str(g, path, "id", "gateway");
    s.gateway.scan_interval_us = msec(get_i64(g, path, "scan_interval_ms", 50));
    s.gateway.scan_window_us =
        g.contains("scan_window_ms")
            ? msec(get_i64(g, path, "scan_window_ms", 50))
            : s.gateway.scan_interval_us;
    s.gateway.processing_dead_time_us =
        get_i64(g, path, "processing_dead_time_us", 1000);
  }

  if (doc.contains("links")) {
    const json& links = doc["links"];
    if (!links.is_array()) throw ScenarioError("links", "expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const std::string path = "links[" + std::to_string(i) + "]";
      reject_unknown_keys(links[i], path, {"from", "to", "p"});
      LinkRule rule;
      rule.from = get_str(links[i], path, "from", "");
      rule.to = get_str(links[i], path, "to", "");
      rule.p = get_num(links[i], path, "p", 1.0);
      if (rule.from.empty()) throw ScenarioError(path + ".from", "missing required key");
      if (rule.to.empty()) throw ScenarioError(path + ".to", "missing required key");
      s.links.push_back(rule);
    }
  }

  if (doc.contains("radio")) {
    const json& r = doc["radio"];
    reject_unknown_keys(r, "radio",
                        {"airtime_us", "inter_channel_gap_us", "adv_delay"});
    s.radio.airtime_us = get_i64(r, "radio", "airtime_us", 300);
    s.radio.inter_channel_gap_us = get_i64(r, "radio", "inter_channel_gap_us", 400);
    s.radio.adv_delay = get_bool(r, "radio", "adv_delay", true);
  }

  if (doc.contains("accounting")) {
    const json& a = doc["accounting"];
    reject_unknown_keys(a, "accounting",
                        {"strict_origin_dedup", "dedup_horizon_ms"});
    s.accounting.strict_origin_dedup =
        get_bool(a, "accounting", "strict_origin_dedup", false);
    s.accounting.dedup_horizon_us =
        msec(get_i64(a, "accounting", "dedup_horizon_ms", 20));
  }

  if (doc.contains("power")) {
    const json& p = doc["power"];
    reject_unknown_keys(p, "power",
                        {"active_current_ma", "sleep_current_ma",
                         "battery_capacity_mah", "baseline_rate"});
    s.power.model.active_current_ma = get_num(p, "power", "active_current_ma", 7.5);
    s.power.model.sleep_current_ma = get_num(p, "power", "sleep_current_ma", 0.0);
    s.power.model.battery_capacity_mah =
        get_num(p, "power", "battery_capacity_mah", 12000.0);
    s.power.baseline_rate = get_num(p, "power", "baseline_rate", 0.35);
  }

  validate_scenario(s);
  return s;
}

Scenario parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

namespace {

json emit_node(const NodeConfig& n) {
  json out;
  out["id"] = n.id;
  out["period_ms"] = n.period_us / 1000;
  if (n.airtime_us) out["airtime_us"] = *n.airtime_us;
  if (n.inter_channel_gap_us) out["inter_channel_gap_us"] = *n.inter_channel_gap_us;
  if (n.adv_delay) out["adv_delay"] = *n.adv_delay;
  return out;
}

}  // namespace

json emit_scenario(const Scenario& s) {
  json doc;
  doc["duration_s"] = s.duration_us / 1'000'000;
  doc["seed"] = s.seed;
  doc["nodes"] = json::array();
  for (const NodeConfig& n : s.nodes) doc["nodes"].push_back(emit_node(n));
  doc["noise_nodes"] = json::array();
  for (const NodeConfig& n : s.noise_nodes) doc["noise_nodes"].push_back(emit_node(n));

  json relay;
  relay["id"] = s.relay.id;
  relay["scan_interval_ms"] = s.relay.scan_interval_us / 1000;
  relay["scan_window_ms"] = s.relay.scan_window_us / 1000;
  relay["scan_time_ms"] = s.relay.scan_time_us / 1000;
  relay["sleep_time_ms"] = s.relay.sleep_time_us / 1000;
  relay["mode_switch_latency_us"] = s.relay.mode_switch_latency_us;
  relay["duplicate_probability"] = s.relay.duplicate_probability;
  json policy;
  if (s.relay.policy.type == PolicyType::Immediate) {
    policy["type"] = "immediate";
    policy["single_channel_echo"] = s.relay.policy.single_channel_echo;
    policy["resume_listening_after_echo"] = s.relay.policy.resume_listening_after_echo;
  } else {
    policy["type"] = "batching";
    policy["listen_time_ms"] = s.relay.policy.listen_time_us / 1000;
    policy["nr_repeats"] = s.relay.policy.nr_repeats;
    policy["repeat_interval_ms"] = s.relay.policy.repeat_interval_us / 1000;
    policy["cap_repeats_at_count"] = s.relay.policy.cap_repeats_at_count;
  }
  relay["policy"] = policy;
  doc["relay"] = relay;

  json gw;
  gw["id"] = s.gateway.id;
  gw["scan_interval_ms"] = s.gateway.scan_interval_us / 1000;
  gw["scan_window_ms"] = s.gateway.scan_window_us / 1000;
  gw["processing_dead_time_us"] = s.gateway.processing_dead_time_us;
  doc["gateway"] = gw;

  doc["links"] = json::array();
  for (const LinkRule& rule : s.links) {
    doc["links"].push_back({{"from", rule.from}, {"to", rule.to}, {"p", rule.p}});
  }

  doc["radio"] = {{"airtime_us", s.radio.airtime_us},
                  {"inter_channel_gap_us", s.radio.inter_channel_gap_us},
                  {"adv_delay", s.radio.adv_delay}};
  doc["accounting"] = {{"strict_origin_dedup", s.accounting.strict_origin_dedup},
                       {"dedup_horizon_ms", s.accounting.dedup_horizon_us / 1000}};
  doc["power"] = {{"active_current_ma", s.power.model.active_current_ma},
                  {"sleep_current_ma", s.power.model.sleep_current_ma},
                  {"battery_capacity_mah", s.power.model.battery_capacity_mah},
                  {"baseline_rate", s.power.baseline_rate}};
  return doc;
}

void validate_scenario(const Scenario& s) {
  if (s.duration_us <= 0) throw ScenarioError("duration_s", "must be > 0");

  std::set<std::string> ids;
  auto check_node = [&](const NodeConfig& n, const std::string& path) {
    if (n.period_us <= 0) throw ScenarioError(path + ".period_ms", "must be > 0");
    if (n.airtime_us && (*n.airtime_us <= 0 || *n.airtime_us > 50'000)) {
      throw ScenarioError(path + ".airtime_us", "must be in (0, 50000]");
    }
    if (n.inter_channel_gap_us && *n.inter_channel_gap_us < 0) {
      throw ScenarioError(path + ".inter_channel_gap_us", "must be >= 0");
    }
    if (!ids.insert(n.id).second) {
      throw ScenarioError(path + ".id", "duplicate device id '" + n.id + "'");
    }
  };
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    check_node(s.nodes[i], "nodes[" + std::to_string(i) + "]");
  }
  for (std::size_t i = 0; i < s.noise_nodes.size(); ++i) {
    check_node(s.noise_nodes[i], "noise_nodes[" + std::to_string(i) + "]");
  }
  if (!ids.insert(s.relay.id).second) {
    throw ScenarioError("relay.id", "duplicate device id '" + s.relay.id + "'");
  }
  if (!ids.insert(s.gateway.id).second) {
    throw ScenarioError("gateway.id", "duplicate device id '" + s.gateway.id + "'");
  }

  if (s.radio.airtime_us <= 0 || s.radio.airtime_us > 50'000) {
    throw ScenarioError("radio.airtime_us", "must be in (0, 50000]");
  }
  if (s.radio.inter_channel_gap_us < 0) {
    throw ScenarioError("radio.inter_channel_gap_us", "must be >= 0");
  }

  const RelayConfig& r = s.relay;
  if (r.scan_interval_us <= 0) throw ScenarioError("relay.scan_interval_ms", "must be > 0");
  if (r.scan_window_us < 0) throw ScenarioError("relay.scan_window_ms", "must be >= 0");
  if (r.scan_window_us > r.scan_interval_us) {
    throw ScenarioError("relay.scan_window_ms",
                        "scan_window must be <= scan_interval");
  }
  if (r.scan_time_us <= 0) throw ScenarioError("relay.scan_time_ms", "must be > 0");
  if (r.sleep_time_us < 0) throw ScenarioError("relay.sleep_time_ms", "must be >= 0");
  if (r.mode_switch_latency_us < 0) {
    throw ScenarioError("relay.mode_switch_latency_us", "must be >= 0");
  }
  if (r.duplicate_probability < 0.0 || r.duplicate_probability > 1.0) {
    throw ScenarioError("relay.duplicate_probability", "must be in [0,1]");
  }
  if (r.policy.type == PolicyType::Batching) {
    const ForwardingPolicy& p = r.policy;
    if (p.listen_time_us <= 0) {
      throw ScenarioError("relay.policy.listen_time_ms", "must be > 0");
    }
    if (p.nr_repeats < 0) {
      throw ScenarioError("relay.policy.nr_repeats", "must be >= 0");
    }
    if (p.repeat_interval_us <= 0) {
      throw ScenarioError("relay.policy.repeat_interval_ms", "must be > 0");
    }
    // A full 3-channel echo event has to fit in one repeat slot.
    const std::int64_t echo_span =
        3 * s.radio.airtime_us + 2 * s.radio.inter_channel_gap_us;
    if (p.nr_repeats > 0 && p.repeat_interval_us < echo_span) {
      throw ScenarioError("relay.policy.repeat_interval_ms",
                          "must be >= the echo event span (" +
                              std::to_string(echo_span) + " us)");
    }
  }

  const GatewayConfig& g = s.gateway;
  if (g.scan_interval_us <= 0) throw ScenarioError("gateway.scan_interval_ms", "must be > 0");
  if (g.scan_window_us < 0 || g.scan_window_us > g.scan_interval_us) {
    throw ScenarioError("gateway.scan_window_ms",
                        "scan_window must be in [0, scan_interval]");
  }
  if (g.processing_dead_time_us < 0) {
    throw ScenarioError("gateway.processing_dead_time_us", "must be >= 0");
  }

  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    const LinkRule& rule = s.links[i];
    if (rule.p < 0.0 || rule.p > 1.0) throw ScenarioError(path + ".p", "must be in [0,1]");
    for (const std::string& endpoint : {rule.from, rule.to}) {
      if (endpoint == "nodes" || endpoint == "noise" || endpoint == "relay" ||
          endpoint == "gateway" || endpoint == "*" || ids.count(endpoint)) {
        continue;
      }
      throw ScenarioError(path, "unknown device or alias '" + endpoint + "'");
    }
  }

  const PowerModel& pm = s.power.model;
  if (pm.active_current_ma <= pm.sleep_current_ma || pm.sleep_current_ma < 0) {
    throw ScenarioError("power", "requires active_current > sleep_current >= 0");
  }
  if (pm.battery_capacity_mah <= 0) {
    throw ScenarioError("power.battery_capacity_mah", "must be > 0");
  }
  if (s.power.baseline_rate < 0.0 || s.power.baseline_rate > 1.0) {
    throw ScenarioError("power.baseline_rate", "must be in [0,1]");
  }
}

LinkMatrix build_link_matrix(const Scenario& s) {
  const int n_members = static_cast<int>(s.nodes.size());
  const int n_noise = static_cast<int>(s.noise_nodes.size());
  const int relay = n_members + n_noise;
  const int gateway = relay + 1;
  LinkMatrix m(gateway + 1);

  // Default paper-shaped topology.
  for (int i = 0; i < n_members + n_noise; ++i) {
    m.set(i, relay, 1.0);
    m.set(i, gateway, 1.0);
  }
  m.set(relay, gateway, 1.0);

  auto expand = [&](const std::string& endpoint) {
    std::vector<int> out;
    if (endpoint == "nodes" || endpoint == "*") {
      for (int i = 0; i < n_members; ++i) out.push_back(i);
    }
    if (endpoint == "noise" || endpoint == "*") {
      for (int i = 0; i < n_noise; ++i) out.push_back(n_members + i);
    }
    if (endpoint == "relay" || endpoint == "*") out.push_back(relay);
    if (endpoint == "gateway" || endpoint == "*") out.push_back(gateway);
    if (!out.empty()) return out;
    for (int i = 0; i < n_members; ++i) {
      if (s.nodes[i].id == endpoint) out.push_back(i);
    }
    for (int i = 0; i < n_noise; ++i) {
      if (s.noise_nodes[i].id == endpoint) out.push_back(n_members + i);
    }
    if (s.relay.id == endpoint) out.push_back(relay);
    if (s.gateway.id == endpoint) out.push_back(gateway);
    return out;
  };

  for (const LinkRule& rule : s.links) {
    for (int from : expand(rule.from)) {
      for (int to : expand(rule.to)) m.set(from, to, rule.p);
    }
  }
  return m;
}

std::int64_t Scenario::nominal_active_us() const {
  std::int64_t active = relay.listen_phase_us();
  if (relay.policy.type == PolicyType::Batching) {
    active += relay.policy.repeat_interval_us * relay.policy.nr_repeats *
              static_cast<std::int64_t>(nodes.size());
  }
  return active;
}

double Scenario::configured_duty() const {
  const double active = static_cast<double>(nominal_active_us());
  return active / (active + static_cast<double>(relay.sleep_time_us));
}

void apply_duty_cycle(Scenario& s, double duty) {
  if (duty <= 0.0 || duty > 1.0) {
    throw ScenarioError("duty_cycle", "must be in (0,1]");
  }
  const double active = static_cast<double>(s.nominal_active_us());
  s.relay.sleep_time_us =
      static_cast<std::int64_t>(active * (1.0 / duty - 1.0) + 0.5);
}

}  // namespace blesim
