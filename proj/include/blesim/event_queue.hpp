#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "blesim/sim_time.hpp"

namespace blesim {

enum class EventKind {
  AdvertiseStart,
  TxStart,
  TxEnd,
  RelayHop,
  RelayWindowEnd,
  RelayPhaseEnd,
  RelayForwardSlot,
  RelaySleepEnd,
  RelayEchoBegin,
  GatewayHop,
  GatewayWindowEnd,
  GatewayFree,
};

const char* to_string(EventKind kind);

struct Event {
  SimTime fire_at = 0;
  std::uint64_t seq = 0;  // monotone tiebreak; (fire_at, seq) totally orders
  int target = -1;        // device index, -1 for engine-level events
  EventKind kind = EventKind::AdvertiseStart;
  std::int64_t a = 0;  // kind-specific payload
  std::int64_t b = 0;
};

struct EventAfter {
  bool operator()(const Event& x, const Event& y) const {
    if (x.fire_at != y.fire_at) return x.fire_at > y.fire_at;
    return x.seq > y.seq;
  }
};

class EventQueue {
 public:
  // `now` is the current clock; scheduling in the past is a simulator bug.
  void schedule(SimTime now, SimTime at, int target, EventKind kind,
                std::int64_t a = 0, std::int64_t b = 0);

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Event& top() const { return heap_.top(); }
  Event pop();

  std::uint64_t scheduled_count() const { return scheduled_; }
  std::uint64_t popped_count() const { return popped_; }

 private:
  std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t scheduled_ = 0;
  std::uint64_t popped_ = 0;
};

}  // namespace blesim
