#include "blesim/sim.hpp"

#include <algorithm>
#include <map>

#include "blesim/engine.hpp"
#include "blesim/rng.hpp"

namespace blesim {

namespace {

struct NodeState {
  std::string name;
  bool member = true;
  std::int64_t period_us = 0;
  std::int64_t airtime_us = 0;
  std::int64_t gap_us = 0;
  bool adv_delay = true;
  std::uint64_t origin_seq = 0;
  RngStream rng;
};

struct RelayState {
  RelayConfig cfg;
  std::int64_t airtime_us = 0;
  std::int64_t gap_us = 0;
  RngStream rng;

  enum class Phase { Scan, Forward, Sleep };
  Phase phase = Phase::Scan;
  std::int64_t epoch = 0;  // bumped on phase change; stale events are ignored
  int channel_idx = 0;
  std::uint64_t dwell = 0;
  SimTime dwell_start = 0;
  bool echoed_this_dwell = false;
  bool echo_in_progress = false;
  std::uint64_t echo_start_dwell = 0;
  int echo_pdus_outstanding = 0;
  // Deferred transition while echo PDUs are still on air.
  enum class Pending { None, PhaseEnd, CycleDone };
  Pending pending = Pending::None;
  // origin -> (receptions this cycle, last origin_seq heard)
  std::map<int, std::pair<std::uint64_t, std::uint64_t>> batch;
  std::vector<AdvPacket> forward_plan;
  std::uint64_t echo_seq = 0;
};

struct GatewayState {
  GatewayConfig cfg;
  int channel_idx = 0;
  std::uint64_t dwell = 0;
  SimTime dwell_start = 0;
  bool busy = false;
  std::uint64_t busy_token = 0;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, const RunOptions& opts)
      : scenario_(scenario),
        opts_(opts),
        n_members_(static_cast<int>(scenario.nodes.size())),
        n_noise_(static_cast<int>(scenario.noise_nodes.size())),
        relay_dev_(n_members_ + n_noise_),
        gateway_dev_(relay_dev_ + 1),
        medium_(build_link_matrix(scenario), gateway_dev_ + 1),
        ledger_(scenario.accounting.dedup_horizon_us,
                scenario.accounting.strict_origin_dedup),
        link_rng_(scenario.seed, 0xFFFFFFFFULL) {
    for (int i = 0; i < n_members_ + n_noise_; ++i) {
      const NodeConfig& cfg = i < n_members_
                                  ? scenario.nodes[i]
                                  : scenario.noise_nodes[i - n_members_];
      NodeState n;
      n.name = cfg.id;
      n.member = cfg.member;
      n.period_us = cfg.period_us;
      n.airtime_us = cfg.airtime_us.value_or(scenario.radio.airtime_us);
      n.gap_us = cfg.inter_channel_gap_us.value_or(scenario.radio.inter_channel_gap_us);
      n.adv_delay = cfg.adv_delay.value_or(scenario.radio.adv_delay);
      n.rng = RngStream(scenario.seed, static_cast<std::uint64_t>(i));
      nodes_.push_back(std::move(n));
    }
    relay_.cfg = scenario.relay;
    relay_.airtime_us = scenario.radio.airtime_us;
    relay_.gap_us = scenario.radio.inter_channel_gap_us;
    relay_.rng = RngStream(scenario.seed, static_cast<std::uint64_t>(relay_dev_));
    gateway_.cfg = scenario.gateway;
  }

  RunResult run() {
    for (int i = 0; i < n_members_ + n_noise_; ++i) {
      const SimTime first = nodes_[i].adv_delay
                                ? nodes_[i].rng.uniform_int(0, nodes_[i].period_us)
                                : nodes_[i].period_us;
      engine_.schedule(first, i, EventKind::AdvertiseStart);
    }
    relay_start_cycle(0);
    gateway_start();

    engine_.run_until(scenario_.duration_us,
                      [this](const Event& e) { dispatch(e); });

    return finalize();
  }

 private:
  // ---- generic transmission plumbing ----

  void schedule_pdu(int device, const AdvPacket& pkt, int channel_idx,
                    SimTime start, std::int64_t airtime_us) {
    Transmission t;
    t.id = registry_.size();
    t.pkt = pkt;
    t.channel_idx = channel_idx;
    t.tx_device = device;
    t.start = start;
    t.end = start + airtime_us;
    registry_.push_back(t);
    engine_.schedule(start, device, EventKind::TxStart,
                     static_cast<std::int64_t>(t.id));
  }

  bool member_origin(int origin) const {
    return origin < n_members_;
  }

  std::string device_name(int dev) const {
    if (dev < n_members_ + n_noise_) return nodes_[dev].name;
    if (dev == relay_dev_) return relay_.cfg.id;
    if (dev == gateway_dev_) return gateway_.cfg.id;
    return "?";
  }

  void dispatch(const Event& e) {
    if (opts_.collect_trace) trace(e);
    switch (e.kind) {
      case EventKind::AdvertiseStart: on_advertise_start(e.target); break;
      case EventKind::TxStart: on_tx_start(static_cast<std::uint64_t>(e.a)); break;
      case EventKind::TxEnd: on_tx_end(static_cast<std::uint64_t>(e.a)); break;
      case EventKind::RelayHop: on_relay_hop(e); break;
      case EventKind::RelayWindowEnd: on_relay_window_end(e); break;
      case EventKind::RelayPhaseEnd: on_relay_phase_end(e); break;
      case EventKind::RelayForwardSlot: on_relay_forward_slot(e); break;
      case EventKind::RelaySleepEnd: on_relay_sleep_end(e); break;
      case EventKind::RelayEchoBegin: on_relay_echo_begin(e); break;
      case EventKind::GatewayHop: on_gateway_hop(); break;
      case EventKind::GatewayWindowEnd: on_gateway_window_end(e); break;
      case EventKind::GatewayFree: on_gateway_free(e); break;
    }
  }

  // ---- advertising nodes ----

  void on_advertise_start(int dev) {
    NodeState& n = nodes_[dev];
    ++n.origin_seq;
    if (n.member) {
      ledger_.record_member_event_sent();
    } else {
      ledger_.record_noise_event_sent();
    }
    AdvPacket pkt{dev, n.origin_seq, false, 0};
    // One advertising event: the same PDU on channels 37, 38, 39 in order.
    for (int ch = 0; ch < kNumAdvChannels; ++ch) {
      const SimTime start = engine_.now() + ch * (n.airtime_us + n.gap_us);
      schedule_pdu(dev, pkt, ch, start, n.airtime_us);
    }
    const SimTime jitter = n.adv_delay ? n.rng.uniform_int(0, msec(10)) : 0;
    engine_.schedule(engine_.now() + n.period_us + jitter, dev,
                     EventKind::AdvertiseStart);
  }

  void on_tx_start(std::uint64_t id) {
    medium_.begin_transmission(registry_[id], engine_.now());
    engine_.schedule(registry_[id].end, registry_[id].tx_device, EventKind::TxEnd,
                     static_cast<std::int64_t>(id));
  }

  void on_tx_end(std::uint64_t id) {
    const Transmission tx = registry_[id];
    medium_.end_transmission(id, engine_.now());

    if (tx.tx_device != relay_dev_) {
      const CaptureOutcome outcome =
          medium_.capture_decision(relay_dev_, tx, link_rng_);
      const RxClass cls = ledger_.record_relay_outcome(
          outcome, tx.pkt, member_origin(tx.pkt.origin), engine_.now());
      if (cls == RxClass::Counted) relay_on_counted(tx.pkt);
    }
    if (tx.tx_device != gateway_dev_) {
      const CaptureOutcome outcome =
          medium_.capture_decision(gateway_dev_, tx, link_rng_);
      ledger_.record_gateway_outcome(outcome, tx.pkt,
                                     member_origin(tx.pkt.origin), engine_.now());
      if (outcome == CaptureOutcome::Received) gateway_on_received();
    }

    if (tx.tx_device == relay_dev_) {
      relay_pdu_end();
    } else {
      medium_.set_mode(tx.tx_device, RadioMode::Idle, -1, engine_.now());
    }
  }

  // ---- relay ----

  void relay_start_cycle(SimTime t) {
    RelayState& r = relay_;
    ++r.epoch;
    r.phase = RelayState::Phase::Scan;
    r.channel_idx = 0;
    ++r.dwell;
    r.dwell_start = t;
    r.echoed_this_dwell = false;
    r.pending = RelayState::Pending::None;
    if (r.cfg.scan_window_us > 0) {
      medium_.set_mode(relay_dev_, RadioMode::Listening, 0, t);
    } else {
      medium_.set_mode(relay_dev_, RadioMode::Idle, -1, t);
    }
    engine_.schedule(t + r.cfg.scan_interval_us, relay_dev_, EventKind::RelayHop,
                     r.epoch);
    if (r.cfg.scan_window_us < r.cfg.scan_interval_us) {
      engine_.schedule(t + r.cfg.scan_window_us, relay_dev_,
                       EventKind::RelayWindowEnd, r.epoch,
                       static_cast<std::int64_t>(r.dwell));
    }
    engine_.schedule(t + r.cfg.listen_phase_us(), relay_dev_,
                     EventKind::RelayPhaseEnd, r.epoch);
  }

  void on_relay_hop(const Event& e) {
    RelayState& r = relay_;
    if (e.a != r.epoch) return;
    r.channel_idx = (r.channel_idx + 1) % kNumAdvChannels;
    ++r.dwell;
    r.dwell_start = engine_.now();
    r.echoed_this_dwell = false;
    engine_.schedule(engine_.now() + r.cfg.scan_interval_us, relay_dev_,
                     EventKind::RelayHop, r.epoch);
    if (!r.echo_in_progress && r.cfg.scan_window_us > 0) {
      medium_.set_mode(relay_dev_, RadioMode::Listening, r.channel_idx,
                       engine_.now());
    }
    if (r.cfg.scan_window_us < r.cfg.scan_interval_us) {
      engine_.schedule(engine_.now() + r.cfg.scan_window_us, relay_dev_,
                       EventKind::RelayWindowEnd, r.epoch,
                       static_cast<std::int64_t>(r.dwell));
    }
  }

  void on_relay_window_end(const Event& e) {
    RelayState& r = relay_;
    if (e.a != r.epoch || static_cast<std::uint64_t>(e.b) != r.dwell) return;
    if (medium_.mode_of(relay_dev_) == RadioMode::Listening) {
      medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());
    }
  }

  void relay_on_counted(const AdvPacket& pkt) {
    RelayState& r = relay_;
    if (r.phase != RelayState::Phase::Scan) return;
    if (r.cfg.policy.type == PolicyType::Immediate) {
      // Only one packet is relayed per scan interval.
      if (r.echoed_this_dwell) return;
      start_immediate_echo(pkt);
    } else {
      auto& slot = r.batch[pkt.origin];
      ++slot.first;
      slot.second = pkt.origin_seq;
    }
  }

  void start_immediate_echo(const AdvPacket& pkt) {
    RelayState& r = relay_;
    r.echoed_this_dwell = true;
    r.echo_in_progress = true;
    r.echo_start_dwell = r.dwell;
    medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());

    const bool duplicate = r.cfg.duplicate_probability > 0.0 &&
                           r.rng.uniform01() < r.cfg.duplicate_probability;
    const int n_events = duplicate ? 2 : 1;
    const int n_channels = r.cfg.policy.single_channel_echo ? 1 : kNumAdvChannels;

    SimTime t = engine_.now() + r.cfg.mode_switch_latency_us;
    for (int ev = 0; ev < n_events; ++ev) {
      AdvPacket echo{pkt.origin, pkt.origin_seq, true, r.echo_seq++};
      ledger_.record_echo_event_sent();
      for (int ch = 0; ch < n_channels; ++ch) {
        schedule_pdu(relay_dev_, echo, ch, t, r.airtime_us);
        t += r.airtime_us + r.gap_us;
      }
    }
    r.echo_pdus_outstanding = n_events * n_channels;
  }

  void relay_pdu_end() {
    RelayState& r = relay_;
    --r.echo_pdus_outstanding;
    if (r.echo_pdus_outstanding > 0) {
      medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());
      return;
    }
    r.echo_in_progress = false;
    if (r.pending != RelayState::Pending::None) {
      const auto pending = r.pending;
      r.pending = RelayState::Pending::None;
      if (pending == RelayState::Pending::PhaseEnd) {
        relay_phase_end_now();
      } else {
        relay_sleep_or_restart();
      }
      return;
    }
    if (r.phase == RelayState::Phase::Scan) {
      // After an immediate echo the relay rejoins scanning at the next hop;
      // the dwell schedule itself is never reset.
      const bool new_dwell = r.dwell != r.echo_start_dwell;
      const bool within_window =
          engine_.now() < r.dwell_start + r.cfg.scan_window_us;
      if ((new_dwell || r.cfg.policy.resume_listening_after_echo) &&
          within_window) {
        medium_.set_mode(relay_dev_, RadioMode::Listening, r.channel_idx,
                         engine_.now());
      } else {
        medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());
      }
    } else {
      medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());
    }
  }

  void on_relay_phase_end(const Event& e) {
    RelayState& r = relay_;
    if (e.a != r.epoch) return;
    if (r.echo_in_progress) {
      r.pending = RelayState::Pending::PhaseEnd;
      return;
    }
    relay_phase_end_now();
  }

  void relay_phase_end_now() {
    RelayState& r = relay_;
    ++r.epoch;
    if (r.cfg.policy.type == PolicyType::Immediate) {
      relay_sleep_or_restart();
      return;
    }
    r.phase = RelayState::Phase::Forward;
    medium_.set_mode(relay_dev_, RadioMode::Idle, -1, engine_.now());
    r.forward_plan.clear();
    for (const auto& [origin, entry] : r.batch) {
      const auto [count, last_seq] = entry;
      const std::uint64_t repeats =
          r.cfg.policy.cap_repeats_at_count
              ? std::min<std::uint64_t>(count, r.cfg.policy.nr_repeats)
              : static_cast<std::uint64_t>(r.cfg.policy.nr_repeats);
      for (std::uint64_t k = 0; k < repeats; ++k) {
        r.forward_plan.push_back(AdvPacket{origin, last_seq, true, 0});
      }
    }
    r.batch.clear();
    if (r.forward_plan.empty()) {
      relay_sleep_or_restart();
      return;
    }
    engine_.schedule(engine_.now() + r.cfg.mode_switch_latency_us, relay_dev_,
                     EventKind::RelayForwardSlot, r.epoch, 0);
  }

  void on_relay_forward_slot(const Event& e) {
    RelayState& r = relay_;
    if (e.a != r.epoch) return;
    const std::size_t i = static_cast<std::size_t>(e.b);
    if (i >= r.forward_plan.size()) {
      r.forward_plan.clear();
      if (r.echo_in_progress) {
        r.pending = RelayState::Pending::CycleDone;
      } else {
        relay_sleep_or_restart();
      }
      return;
    }
    AdvPacket echo = r.forward_plan[i];
    echo.echo_seq = r.echo_seq++;
    ledger_.record_echo_event_sent();
    SimTime t = engine_.now();
    for (int ch = 0; ch < kNumAdvChannels; ++ch) {
      schedule_pdu(relay_dev_, echo, ch, t, r.airtime_us);
      t += r.airtime_us + r.gap_us;
    }
    r.echo_pdus_outstanding += kNumAdvChannels;
    r.echo_in_progress = true;
    engine_.schedule(engine_.now() + r.cfg.policy.repeat_interval_us, relay_dev_,
                     EventKind::RelayForwardSlot, r.epoch,
                     static_cast<std::int64_t>(i + 1));
  }

  void relay_sleep_or_restart() {
    RelayState& r = relay_;
    ++r.epoch;
    if (r.cfg.sleep_time_us > 0) {
      r.phase = RelayState::Phase::Sleep;
      medium_.set_mode(relay_dev_, RadioMode::Sleeping, -1, engine_.now());
      engine_.schedule(engine_.now() + r.cfg.sleep_time_us, relay_dev_,
                       EventKind::RelaySleepEnd, r.epoch);
    } else {
      relay_start_cycle(engine_.now());
    }
  }

  void on_relay_sleep_end(const Event& e) {
    if (e.a != relay_.epoch) return;
    relay_start_cycle(engine_.now());
  }

  void on_relay_echo_begin(const Event&) {}  // reserved for traces

  // ---- gateway ----

  void gateway_start() {
    GatewayState& g = gateway_;
    g.dwell_start = 0;
    if (g.cfg.scan_window_us > 0) {
      medium_.set_mode(gateway_dev_, RadioMode::Listening, 0, 0);
    } else {
      medium_.set_mode(gateway_dev_, RadioMode::Idle, -1, 0);
    }
    engine_.schedule(g.cfg.scan_interval_us, gateway_dev_, EventKind::GatewayHop);
    if (g.cfg.scan_window_us < g.cfg.scan_interval_us) {
      engine_.schedule(g.cfg.scan_window_us, gateway_dev_,
                       EventKind::GatewayWindowEnd, 0);
    }
  }

  void on_gateway_hop() {
    GatewayState& g = gateway_;
    g.channel_idx = (g.channel_idx + 1) % kNumAdvChannels;
    ++g.dwell;
    g.dwell_start = engine_.now();
    if (!g.busy && g.cfg.scan_window_us > 0) {
      medium_.set_mode(gateway_dev_, RadioMode::Listening, g.channel_idx,
                       engine_.now());
    }
    engine_.schedule(engine_.now() + g.cfg.scan_interval_us, gateway_dev_,
                     EventKind::GatewayHop);
    if (g.cfg.scan_window_us < g.cfg.scan_interval_us) {
      engine_.schedule(engine_.now() + g.cfg.scan_window_us, gateway_dev_,
                       EventKind::GatewayWindowEnd,
                       static_cast<std::int64_t>(g.dwell));
    }
  }

  void on_gateway_window_end(const Event& e) {
    GatewayState& g = gateway_;
    if (static_cast<std::uint64_t>(e.a) != g.dwell) return;
    if (!g.busy && medium_.mode_of(gateway_dev_) == RadioMode::Listening) {
      medium_.set_mode(gateway_dev_, RadioMode::Idle, -1, engine_.now());
    }
  }

  void gateway_on_received() {
    GatewayState& g = gateway_;
    if (g.cfg.processing_dead_time_us <= 0) return;
    g.busy = true;
    ++g.busy_token;
    medium_.set_mode(gateway_dev_, RadioMode::Idle, -1, engine_.now());
    engine_.schedule(engine_.now() + g.cfg.processing_dead_time_us, gateway_dev_,
                     EventKind::GatewayFree,
                     static_cast<std::int64_t>(g.busy_token));
  }

  void on_gateway_free(const Event& e) {
    GatewayState& g = gateway_;
    if (!g.busy || static_cast<std::uint64_t>(e.a) != g.busy_token) return;
    g.busy = false;
    if (engine_.now() < g.dwell_start + g.cfg.scan_window_us) {
      medium_.set_mode(gateway_dev_, RadioMode::Listening, g.channel_idx,
                       engine_.now());
    } else {
      medium_.set_mode(gateway_dev_, RadioMode::Idle, -1, engine_.now());
    }
  }

  // ---- bookkeeping ----

  void trace(const Event& e) {
    std::string detail;
    if (e.kind == EventKind::TxStart || e.kind == EventKind::TxEnd) {
      const Transmission& t = registry_[static_cast<std::uint64_t>(e.a)];
      detail = "ch=" + std::to_string(channel_number(t.channel_idx)) +
               " origin=" + device_name(t.pkt.origin) +
               " seq=" + std::to_string(t.pkt.origin_seq) +
               (t.pkt.is_echo ? " echo=" + std::to_string(t.pkt.echo_seq) : "");
    } else if (e.kind == EventKind::RelayHop) {
      detail = "ch=" +
               std::to_string(channel_number((relay_.channel_idx + 1) %
                                             kNumAdvChannels));
    }
    trace_lines_.push_back(std::to_string(e.fire_at) + "\t" +
                           device_name(e.target) + "\t" + to_string(e.kind) +
                           "\t" + detail);
  }

  RunResult finalize() {
    RunResult result;
    RateReport& rep = result.report;
    rep.nodes_to_relay = ledger_.nodes_to_relay_rate();
    rep.relay_to_gateway = ledger_.relay_to_gateway_rate();
    rep.nodes_to_gateway = ledger_.nodes_to_gateway_rate();
    if (relay_.cfg.policy.type == PolicyType::Batching) {
      rep.listen_ratio = listen_ratio(
          static_cast<double>(relay_.cfg.policy.listen_time_us),
          static_cast<double>(relay_.cfg.policy.repeat_interval_us),
          relay_.cfg.policy.nr_repeats, n_members_);
    } else {
      rep.listen_ratio = 1.0;
    }
    rep.configured_duty = scenario_.configured_duty();
    rep.measured_duty = measured_relay_duty();
    rep.member_events_sent = ledger_.member_events_sent();
    rep.echo_events_sent = ledger_.echo_events_sent();
    rep.relay_counters = ledger_.relay();
    rep.gateway_counters = ledger_.gateway();
    rep.gateway_echo_events = ledger_.gateway_echo_events();
    rep.gateway_direct_events = ledger_.gateway_direct_events();
    rep.seed = scenario_.seed;
    rep.duration_us = scenario_.duration_us;

    result.trace_lines = std::move(trace_lines_);
    if (opts_.collect_state_logs) {
      for (int dev = 0; dev <= gateway_dev_; ++dev) {
        result.state_logs.push_back(
            DeviceStateLog{device_name(dev), medium_.state_log(dev)});
      }
    }
    result.events_scheduled = engine_.queue().scheduled_count();
    result.events_dispatched = engine_.queue().popped_count();
    return result;
  }

  double measured_relay_duty() const {
    const auto& log = medium_.state_log(relay_dev_);
    SimTime asleep = 0;
    for (std::size_t i = 0; i < log.size(); ++i) {
      if (log[i].mode != RadioMode::Sleeping) continue;
      const SimTime until =
          i + 1 < log.size() ? log[i + 1].at : scenario_.duration_us;
      asleep += std::min(until, scenario_.duration_us) - log[i].at;
    }
    return 1.0 - static_cast<double>(asleep) /
                     static_cast<double>(scenario_.duration_us);
  }

  const Scenario& scenario_;
  RunOptions opts_;
  int n_members_;
  int n_noise_;
  int relay_dev_;
  int gateway_dev_;

  Engine engine_;
  Medium medium_;
  PacketLedger ledger_;
  RngStream link_rng_;

  std::vector<NodeState> nodes_;
  RelayState relay_;
  GatewayState gateway_;
  std::vector<Transmission> registry_;
  std::vector<std::string> trace_lines_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& opts) {
  validate_scenario(scenario);
  Simulation sim(scenario, opts);
  return sim.run();
}

}  // namespace blesim
