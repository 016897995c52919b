#include <doctest.h>

#include "blesim/ledger.hpp"

using namespace blesim;

namespace {

AdvPacket original(int origin, std::uint64_t seq) {
  AdvPacket p;
  p.origin = origin;
  p.origin_seq = seq;
  return p;
}

AdvPacket echo(int origin, std::uint64_t echo_seq) {
  AdvPacket p;
  p.origin = origin;
  p.is_echo = true;
  p.echo_seq = echo_seq;
  return p;
}

}  // namespace

TEST_CASE("listen ratio matches the closed form") {
  // 10 s listening, 10 ms repeat interval, 5 repeats, 11 nodes.
  CHECK(listen_ratio(10000, 10, 5, 11) == doctest::Approx(10000.0 / 10550.0));
  // 10 repeats, 10 nodes.
  CHECK(listen_ratio(10000, 10, 10, 10) == doctest::Approx(10000.0 / 11000.0));
  // No forwarding at all listens 100% of the time.
  CHECK(listen_ratio(10000, 10, 0, 11) == 1.0);
  CHECK(listen_ratio(10000, 10, 5, 0) == 1.0);
}

TEST_CASE("listen ratio rejects bad arguments and decreases monotonically") {
  CHECK_THROWS_AS(listen_ratio(0, 10, 5, 11), std::invalid_argument);
  CHECK_THROWS_AS(listen_ratio(10000, -1, 5, 11), std::invalid_argument);
  double prev = 1.1;
  for (int nr = 0; nr <= 20; ++nr) {
    const double r = listen_ratio(10000, 10, nr, 11);
    CHECK(r < prev);
    CHECK(r > 0.0);
    CHECK(r <= 1.0);
    prev = r;
  }
}

TEST_CASE("one advertising event counts once, repeats are duplicates") {
  PacketLedger ledger(msec(20), false);
  ledger.record_member_event_sent();
  const AdvPacket pkt = original(0, 1);
  // Three PDUs of the same event, 700 us apart.
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, pkt, true, 1000) ==
        RxClass::Counted);
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, pkt, true, 1700) ==
        RxClass::Duplicate);
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, pkt, true, 2400) ==
        RxClass::Duplicate);
  CHECK(ledger.relay().counted == 1);
  CHECK(ledger.relay().duplicates == 2);
  CHECK(ledger.nodes_to_relay_rate() == 1.0);
}

TEST_CASE("the next event of the same origin is a fresh count") {
  PacketLedger ledger(msec(20), false);
  ledger.record_member_event_sent();
  ledger.record_member_event_sent();
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, original(0, 1),
                                    true, 1000) == RxClass::Counted);
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, original(0, 2),
                                    true, sec(1)) == RxClass::Counted);
  CHECK(ledger.nodes_to_relay_rate() == 1.0);
}

TEST_CASE("non-member origins are filtered, not counted") {
  PacketLedger ledger(msec(20), false);
  ledger.record_noise_event_sent();
  CHECK(ledger.record_relay_outcome(CaptureOutcome::Received, original(5, 1),
                                    false, 1000) == RxClass::Filtered);
  CHECK(ledger.relay().filtered == 1);
  CHECK(ledger.relay().counted == 0);
  CHECK(!ledger.nodes_to_relay_rate().has_value());
}

TEST_CASE("losses are tallied by reason and conserved against attempts") {
  PacketLedger ledger(msec(20), false);
  const AdvPacket pkt = original(0, 1);
  ledger.record_relay_outcome(CaptureOutcome::NotTuned, pkt, true, 0);
  ledger.record_relay_outcome(CaptureOutcome::Collision, pkt, true, 1);
  ledger.record_relay_outcome(CaptureOutcome::Unreachable, pkt, true, 2);
  ledger.record_relay_outcome(CaptureOutcome::RxBusy, pkt, true, 3);
  ledger.record_relay_outcome(CaptureOutcome::Asleep, pkt, true, 4);
  ledger.record_relay_outcome(CaptureOutcome::Received, pkt, true, 5);
  const ReceiverCounters& c = ledger.relay();
  CHECK(c.losses.not_tuned == 1);
  CHECK(c.losses.collision == 1);
  CHECK(c.losses.unreachable == 1);
  CHECK(c.losses.rx_busy == 1);
  CHECK(c.losses.asleep == 1);
  CHECK(c.attempts == c.received + c.losses.total());
}

TEST_CASE("gateway splits echoes from direct receptions") {
  PacketLedger ledger(msec(20), false);
  ledger.record_member_event_sent();
  ledger.record_member_event_sent();
  ledger.record_echo_event_sent();
  ledger.record_gateway_outcome(CaptureOutcome::Received, echo(0, 1), true, 100);
  ledger.record_gateway_outcome(CaptureOutcome::Received, original(1, 1), true, 200);
  CHECK(ledger.gateway_echo_events() == 1);
  CHECK(ledger.gateway_direct_events() == 1);
  CHECK(ledger.relay_to_gateway_rate() == 1.0);
  CHECK(ledger.nodes_to_gateway_rate() == 1.0);
}

TEST_CASE("echoes and originals of one origin dedup independently") {
  PacketLedger ledger(msec(20), false);
  CHECK(ledger.record_gateway_outcome(CaptureOutcome::Received, original(0, 1),
                                      true, 100) == RxClass::Counted);
  CHECK(ledger.record_gateway_outcome(CaptureOutcome::Received, echo(0, 1),
                                      true, 200) == RxClass::Counted);
  CHECK(ledger.record_gateway_outcome(CaptureOutcome::Received, echo(0, 2),
                                      true, 300) == RxClass::Counted);
}

TEST_CASE("strict mode counts unique origin deliveries once") {
  PacketLedger ledger(msec(20), true);
  ledger.record_member_event_sent();
  ledger.record_member_event_sent();
  AdvPacket first_echo = echo(0, 1);
  first_echo.origin_seq = 7;
  AdvPacket second_echo = echo(0, 2);
  second_echo.origin_seq = 7;  // a repeat of the same original packet
  ledger.record_gateway_outcome(CaptureOutcome::Received, first_echo, true, 100);
  ledger.record_gateway_outcome(CaptureOutcome::Received, second_echo, true, sec(1));
  CHECK(ledger.gateway_echo_events() == 2);
  CHECK(ledger.nodes_to_gateway_rate() == 0.5);  // one unique of two sent
}

TEST_CASE("rates are absent until a denominator exists") {
  PacketLedger ledger(msec(20), false);
  CHECK(!ledger.nodes_to_relay_rate().has_value());
  CHECK(!ledger.relay_to_gateway_rate().has_value());
  CHECK(!ledger.nodes_to_gateway_rate().has_value());
  ledger.record_member_event_sent();
  CHECK(ledger.nodes_to_relay_rate() == 0.0);
}
