#include "blesim/event_queue.hpp"

#include <stdexcept>
#include <string>

namespace blesim {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::AdvertiseStart: return "advertise-start";
    case EventKind::TxStart: return "tx-start";
    case EventKind::TxEnd: return "tx-end";
    case EventKind::RelayHop: return "channel-hop";
    case EventKind::RelayWindowEnd: return "scan-window-end";
    case EventKind::RelayPhaseEnd: return "scan-phase-end";
    case EventKind::RelayForwardSlot: return "forward-slot";
    case EventKind::RelaySleepEnd: return "sleep-end";
    case EventKind::RelayEchoBegin: return "echo-begin";
    case EventKind::GatewayHop: return "gateway-hop";
    case EventKind::GatewayWindowEnd: return "gateway-window-end";
    case EventKind::GatewayFree: return "gateway-free";
  }
  return "?";
}

void EventQueue::schedule(SimTime now, SimTime at, int target, EventKind kind,
                          std::int64_t a, std::int64_t b) {
  if (at < now) {
    throw std::logic_error("EventQueue::schedule: event at t=" +
                           std::to_string(at) + "us is in the past (now=" +
                           std::to_string(now) + "us)");
  }
  heap_.push(Event{at, next_seq_++, target, kind, a, b});
  ++scheduled_;
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  ++popped_;
  return e;
}

}  // namespace blesim
