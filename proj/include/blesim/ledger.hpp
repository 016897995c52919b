#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "blesim/medium.hpp"
#include "blesim/packet.hpp"
#include "blesim/sim_time.hpp"

namespace blesim {

// Eq.-style listen/forward ratio: S_Time / (S_Time + R * Nr * N).
// Arguments are unit-agnostic as long as s_time and repeat_interval agree.
double listen_ratio(double s_time, double repeat_interval, int nr_repeats,
                    int n_nodes);

struct LossCounts {
  std::uint64_t not_tuned = 0;
  std::uint64_t collision = 0;
  std::uint64_t unreachable = 0;
  std::uint64_t rx_busy = 0;
  std::uint64_t asleep = 0;

  std::uint64_t total() const {
    return not_tuned + collision + unreachable + rx_busy + asleep;
  }
};

enum class RxClass {
  NotReceived,
  Counted,    // first reception of this advertising event
  Duplicate,  // same event heard again within the dedup horizon
  Filtered,   // non-member origin, dropped by the MAC filter
};

struct ReceiverCounters {
  std::uint64_t attempts = 0;  // capture decisions evaluated at this receiver
  std::uint64_t received = 0;
  LossCounts losses;
  std::uint64_t counted = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t filtered = 0;
};

// Per-run accounting for every transmission and reception, from which the
// per-hop reception rates are computed. Counters are monotone during a run.
class PacketLedger {
 public:
  PacketLedger(SimTime dedup_horizon_us, bool strict_origin_dedup)
      : dedup_horizon_(dedup_horizon_us), strict_(strict_origin_dedup) {}

  void record_member_event_sent() { ++member_events_sent_; }
  void record_noise_event_sent() { ++noise_events_sent_; }
  void record_echo_event_sent() { ++echo_events_sent_; }

  // Called for every capture decision. Returns how a received packet was
  // classified so the device model can react to Counted receptions only.
  RxClass record_relay_outcome(CaptureOutcome outcome, const AdvPacket& pkt,
                               bool member_origin, SimTime now);
  RxClass record_gateway_outcome(CaptureOutcome outcome, const AdvPacket& pkt,
                                 bool member_origin, SimTime now);

  const ReceiverCounters& relay() const { return relay_; }
  const ReceiverCounters& gateway() const { return gateway_; }

  std::uint64_t member_events_sent() const { return member_events_sent_; }
  std::uint64_t noise_events_sent() const { return noise_events_sent_; }
  std::uint64_t echo_events_sent() const { return echo_events_sent_; }
  std::uint64_t gateway_echo_events() const { return gw_echo_counted_; }
  std::uint64_t gateway_direct_events() const { return gw_direct_counted_; }

  // Member advertising events deduplicated at the relay / events sent.
  std::optional<double> nodes_to_relay_rate() const;
  // Echo events received at the gateway / echo events the relay sent.
  std::optional<double> relay_to_gateway_rate() const;
  // (Echo events + direct member events at the gateway) / events sent.
  // In strict mode the numerator is unique (origin, origin_seq) deliveries.
  std::optional<double> nodes_to_gateway_rate() const;

 private:
  struct EventKey {
    bool is_echo;
    int origin;
    std::uint64_t seq;  // origin_seq for originals, echo_seq for echoes
    auto operator<=>(const EventKey&) const = default;
  };

  static EventKey key_of(const AdvPacket& pkt) {
    return EventKey{pkt.is_echo, pkt.origin,
                    pkt.is_echo ? pkt.echo_seq : pkt.origin_seq};
  }

  // Counted once per advertising event: a second PDU of the same event
  // within the horizon is a duplicate.
  bool is_duplicate(std::map<EventKey, SimTime>& seen, const EventKey& key,
                    SimTime now) const;

  SimTime dedup_horizon_;
  bool strict_;

  std::uint64_t member_events_sent_ = 0;
  std::uint64_t noise_events_sent_ = 0;
  std::uint64_t echo_events_sent_ = 0;

  ReceiverCounters relay_;
  ReceiverCounters gateway_;
  std::uint64_t gw_echo_counted_ = 0;
  std::uint64_t gw_direct_counted_ = 0;

  std::map<EventKey, SimTime> relay_seen_;
  std::map<EventKey, SimTime> gateway_seen_;
  std::set<std::pair<int, std::uint64_t>> gw_unique_origin_seqs_;
};

}  // namespace blesim
