#include "blesim/ledger.hpp"

#include <stdexcept>

namespace blesim {

double listen_ratio(double s_time, double repeat_interval, int nr_repeats,
                    int n_nodes) {
  if (s_time <= 0.0) throw std::invalid_argument("listen_ratio: S_Time must be > 0");
  if (repeat_interval < 0.0 || nr_repeats < 0 || n_nodes < 0) {
    throw std::invalid_argument("listen_ratio: arguments must be >= 0");
  }
  return s_time / (s_time + repeat_interval * nr_repeats * n_nodes);
}

namespace {

void tally_loss(LossCounts& losses, CaptureOutcome outcome) {
  switch (outcome) {
    case CaptureOutcome::NotTuned: ++losses.not_tuned; break;
    case CaptureOutcome::Collision: ++losses.collision; break;
    case CaptureOutcome::Unreachable: ++losses.unreachable; break;
    case CaptureOutcome::RxBusy: ++losses.rx_busy; break;
    case CaptureOutcome::Asleep: ++losses.asleep; break;
    case CaptureOutcome::Received: break;
  }
}

}  // namespace

bool PacketLedger::is_duplicate(std::map<EventKey, SimTime>& seen,
                                const EventKey& key, SimTime now) const {
  auto it = seen.find(key);
  if (it != seen.end() && now - it->second <= dedup_horizon_) return true;
  seen[key] = now;
  return false;
}

RxClass PacketLedger::record_relay_outcome(CaptureOutcome outcome,
                                           const AdvPacket& pkt,
                                           bool member_origin, SimTime now) {
  ++relay_.attempts;
  if (outcome != CaptureOutcome::Received) {
    tally_loss(relay_.losses, outcome);
    return RxClass::NotReceived;
  }
  ++relay_.received;
  if (!member_origin) {
    ++relay_.filtered;
    return RxClass::Filtered;
  }
  if (is_duplicate(relay_seen_, key_of(pkt), now)) {
    ++relay_.duplicates;
    return RxClass::Duplicate;
  }
  ++relay_.counted;
  return RxClass::Counted;
}

RxClass PacketLedger::record_gateway_outcome(CaptureOutcome outcome,
                                             const AdvPacket& pkt,
                                             bool member_origin, SimTime now) {
  ++gateway_.attempts;
  if (outcome != CaptureOutcome::Received) {
    tally_loss(gateway_.losses, outcome);
    return RxClass::NotReceived;
  }
  ++gateway_.received;
  if (!member_origin) {
    ++gateway_.filtered;
    return RxClass::Filtered;
  }
  if (is_duplicate(gateway_seen_, key_of(pkt), now)) {
    ++gateway_.duplicates;
    return RxClass::Duplicate;
  }
  ++gateway_.counted;
  if (pkt.is_echo) {
    ++gw_echo_counted_;
  } else {
    ++gw_direct_counted_;
  }
  gw_unique_origin_seqs_.emplace(pkt.origin, pkt.origin_seq);
  return RxClass::Counted;
}

std::optional<double> PacketLedger::nodes_to_relay_rate() const {
  if (member_events_sent_ == 0) return std::nullopt;
  return static_cast<double>(relay_.counted) /
         static_cast<double>(member_events_sent_);
}

std::optional<double> PacketLedger::relay_to_gateway_rate() const {
  if (echo_events_sent_ == 0) return std::nullopt;
  return static_cast<double>(gw_echo_counted_) /
         static_cast<double>(echo_events_sent_);
}

std::optional<double> PacketLedger::nodes_to_gateway_rate() const {
  if (member_events_sent_ == 0) return std::nullopt;
  const double delivered =
      strict_ ? static_cast<double>(gw_unique_origin_seqs_.size())
              : static_cast<double>(gw_echo_counted_ + gw_direct_counted_);
  return delivered / static_cast<double>(member_events_sent_);
}

}  // namespace blesim
