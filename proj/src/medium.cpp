#include "blesim/medium.hpp"

#include <stdexcept>
#include <string>

namespace blesim {

namespace {
// Collision checks only ever look back one packet length; anything older
// than this can be dropped from the per-channel history.
constexpr SimTime kHistoryHorizonUs = 50'000;
}  // namespace

const char* to_string(RadioMode mode) {
  switch (mode) {
    case RadioMode::Sleeping: return "sleeping";
    case RadioMode::Idle: return "idle";
    case RadioMode::Listening: return "listening";
    case RadioMode::Transmitting: return "transmitting";
  }
  return "?";
}

const char* to_string(CaptureOutcome outcome) {
  switch (outcome) {
    case CaptureOutcome::Received: return "received";
    case CaptureOutcome::NotTuned: return "not-tuned";
    case CaptureOutcome::Collision: return "collision";
    case CaptureOutcome::Unreachable: return "unreachable";
    case CaptureOutcome::RxBusy: return "rx-busy";
    case CaptureOutcome::Asleep: return "asleep";
  }
  return "?";
}

Medium::Medium(LinkMatrix links, int n_devices)
    : links_(std::move(links)),
      states_(n_devices),
      state_logs_(n_devices) {}

void Medium::set_mode(int device, RadioMode mode, int channel_idx, SimTime now) {
  DeviceState& st = states_[device];
  st.mode = mode;
  st.channel_idx = channel_idx;
  st.since = now;
  state_logs_[device].push_back(StateChange{now, mode, channel_idx});
}

void Medium::begin_transmission(const Transmission& t, SimTime now) {
  if (t.end <= t.start) throw std::logic_error("transmission airtime must be > 0");
  if (states_[t.tx_device].mode == RadioMode::Transmitting) {
    throw std::logic_error("device " + std::to_string(t.tx_device) +
                           " began a transmission while already transmitting");
  }
  prune(t.channel_idx, now);
  recent_[t.channel_idx].push_back(t);
  set_mode(t.tx_device, RadioMode::Transmitting, t.channel_idx, now);
}

void Medium::end_transmission(std::uint64_t /*id*/, SimTime now) {
  // Ended transmissions stay in the per-channel history until pruned; the
  // sender's next mode is the caller's decision.
  for (int c = 0; c < kNumAdvChannels; ++c) prune(c, now);
}

CaptureOutcome Medium::capture_decision(int rx_device, const Transmission& t,
                                        RngStream& link_rng) const {
  const double p = links_.reach(t.tx_device, rx_device);
  if (p <= 0.0) return CaptureOutcome::Unreachable;
  if (p < 1.0 && link_rng.uniform01() >= p) return CaptureOutcome::Unreachable;

  const DeviceState& st = states_[rx_device];
  switch (st.mode) {
    case RadioMode::Sleeping:
      return CaptureOutcome::Asleep;
    case RadioMode::Idle:
    case RadioMode::Transmitting:
      return CaptureOutcome::RxBusy;
    case RadioMode::Listening:
      break;
  }
  // The whole [start, end] interval must fall inside one listening stretch
  // on the matching channel; a hop or window edge mid-packet loses it.
  if (st.channel_idx != t.channel_idx || st.since > t.start) {
    return CaptureOutcome::NotTuned;
  }

  for (const Transmission& other : recent_[t.channel_idx]) {
    if (other.id == t.id || other.tx_device == rx_device) continue;
    const bool overlaps = other.start < t.end && other.end > t.start;
    if (overlaps && links_.reach(other.tx_device, rx_device) > 0.0) {
      return CaptureOutcome::Collision;  // no capture effect: both die
    }
  }
  return CaptureOutcome::Received;
}

void Medium::prune(int channel_idx, SimTime now) {
  auto& q = recent_[channel_idx];
  while (!q.empty() && q.front().end + kHistoryHorizonUs < now) q.pop_front();
}

}  // namespace blesim
