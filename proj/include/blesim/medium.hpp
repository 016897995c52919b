#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "blesim/link_matrix.hpp"
#include "blesim/packet.hpp"
#include "blesim/rng.hpp"
#include "blesim/sim_time.hpp"

namespace blesim {

inline constexpr int kNumAdvChannels = 3;

// Advertising channel numbers 37/38/39, stored as index 0..2.
inline constexpr int channel_number(int channel_idx) { return 37 + channel_idx; }

enum class RadioMode {
  Sleeping,      // low-power phase, radio off
  Idle,          // powered but not listening (mode switch, dead time, gaps)
  Listening,
  Transmitting,
};

const char* to_string(RadioMode mode);

struct Transmission {
  std::uint64_t id = 0;
  AdvPacket pkt;
  int channel_idx = 0;
  int tx_device = -1;
  SimTime start = 0;
  SimTime end = 0;  // end - start == airtime > 0
};

enum class CaptureOutcome {
  Received,
  NotTuned,     // listener on another channel, or hopped mid-packet
  Collision,    // another reachable same-channel transmission overlapped
  Unreachable,  // link matrix says no (or probability draw failed)
  RxBusy,       // listener transmitting, mode-switching, or in dead time
  Asleep,       // listener radio off in sleep phase
};

const char* to_string(CaptureOutcome outcome);

struct StateChange {
  SimTime at = 0;
  RadioMode mode = RadioMode::Idle;
  int channel_idx = -1;
};

// The three advertising channels plus per-device radio state. Decides, at
// the end of each transmission, whether a given listener captured it.
class Medium {
 public:
  Medium(LinkMatrix links, int n_devices);

  void set_mode(int device, RadioMode mode, int channel_idx, SimTime now);
  RadioMode mode_of(int device) const { return states_[device].mode; }
  int listening_channel(int device) const { return states_[device].channel_idx; }

  // Registers a transmission and flips the sender to Transmitting.
  // Overlapping self-transmission is a hard fault (half-duplex).
  void begin_transmission(const Transmission& t, SimTime now);

  // Marks the transmission over; the sender's next mode is set by the caller.
  void end_transmission(std::uint64_t id, SimTime now);

  // Valid only after end_transmission(t.id).
  CaptureOutcome capture_decision(int rx_device, const Transmission& t,
                                  RngStream& link_rng) const;

  const LinkMatrix& links() const { return links_; }
  const std::vector<StateChange>& state_log(int device) const {
    return state_logs_[device];
  }

 private:
  struct DeviceState {
    RadioMode mode = RadioMode::Idle;
    int channel_idx = -1;
    SimTime since = 0;
  };

  void prune(int channel_idx, SimTime now);

  LinkMatrix links_;
  std::vector<DeviceState> states_;
  std::vector<std::vector<StateChange>> state_logs_;
  // Active and recently ended transmissions, per channel, for overlap checks.
  std::deque<Transmission> recent_[kNumAdvChannels];
};

}  // namespace blesim
