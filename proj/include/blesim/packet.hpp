#pragma once

#include <cstdint>

namespace blesim {

// Payload of one advertising PDU. The only payload in this network is the
// originating node's identity, so the packet is just identity plus counters.
struct AdvPacket {
  int origin = -1;                // device index of the originating node
  std::uint64_t origin_seq = 0;   // per-origin advertising-event counter
  bool is_echo = false;           // relay-originated re-transmission
  std::uint64_t echo_seq = 0;     // per-relay echo-event counter
};

}  // namespace blesim
