#include <doctest.h>

#include <vector>

#include "blesim/engine.hpp"
#include "blesim/event_queue.hpp"
#include "blesim/rng.hpp"

using namespace blesim;

TEST_CASE("events pop in fire_at order") {
  EventQueue q;
  q.schedule(0, 30, 0, EventKind::TxEnd);
  q.schedule(0, 10, 1, EventKind::TxStart);
  q.schedule(0, 20, 2, EventKind::RelayHop);
  CHECK(q.pop().fire_at == 10);
  CHECK(q.pop().fire_at == 20);
  CHECK(q.pop().fire_at == 30);
}

TEST_CASE("same-time events pop in scheduling order") {
  EventQueue q;
  for (int i = 0; i < 50; ++i) q.schedule(0, 100, i, EventKind::TxStart);
  for (int i = 0; i < 50; ++i) CHECK(q.pop().target == i);
}

TEST_CASE("scheduling in the past is a hard fault") {
  EventQueue q;
  q.schedule(0, 5, 0, EventKind::TxStart);
  CHECK_THROWS_AS(q.schedule(10, 9, 0, EventKind::TxStart), std::logic_error);
  // at == now is legal (zero-latency follow-up events).
  CHECK_NOTHROW(q.schedule(10, 10, 0, EventKind::TxEnd));
}

TEST_CASE("random workload pops in non-decreasing time and conserves events") {
  EventQueue q;
  RngStream r(7, 0);
  SimTime now = 0;
  int scheduled = 0;
  for (int i = 0; i < 500; ++i) {
    q.schedule(now, now + r.uniform_int(0, 1000), 0, EventKind::TxStart);
    ++scheduled;
    if (!q.empty() && r.uniform01() < 0.5) now = q.pop().fire_at;
  }
  SimTime last = now;
  while (!q.empty()) {
    const Event e = q.pop();
    CHECK(e.fire_at >= last);
    last = e.fire_at;
  }
  CHECK(q.scheduled_count() == static_cast<std::uint64_t>(scheduled));
  CHECK(q.popped_count() == q.scheduled_count());
}

TEST_CASE("engine clock follows dispatched events and lands on the horizon") {
  Engine eng;
  std::vector<SimTime> fired;
  eng.schedule(5, 0, EventKind::TxStart);
  eng.schedule(15, 0, EventKind::TxEnd);
  eng.schedule(400, 0, EventKind::RelayHop);  // beyond the horizon
  eng.run_until(100, [&](const Event& e) {
    CHECK(eng.now() == e.fire_at);
    fired.push_back(e.fire_at);
  });
  CHECK(fired == std::vector<SimTime>{5, 15});
  CHECK(eng.now() == 100);
}
