#pragma once

#include <utility>

#include "blesim/event_queue.hpp"
#include "blesim/sim_time.hpp"

namespace blesim {

// Deterministic single-threaded event loop: strict (fire_at, seq) dispatch
// order, clock monotonically non-decreasing.
class Engine {
 public:
  SimTime now() const { return now_; }

  void schedule(SimTime at, int target, EventKind kind, std::int64_t a = 0,
                std::int64_t b = 0) {
    queue_.schedule(now_, at, target, kind, a, b);
  }

  template <typename Handler>
  void run_until(SimTime end, Handler&& handler) {
    while (!queue_.empty() && queue_.top().fire_at <= end) {
      Event e = queue_.pop();
      now_ = e.fire_at;
      handler(e);
    }
    now_ = end;
  }

  const EventQueue& queue() const { return queue_; }

 private:
  SimTime now_ = 0;
  EventQueue queue_;
};

}  // namespace blesim
