#include <doctest.h>

#include <string>

#include "blesim/scenario.hpp"
#include "blesim/sim.hpp"

using namespace blesim;

namespace {

Scenario make(const std::string& text) { return parse_scenario_text(text); }

}  // namespace

TEST_CASE("a 1 Hz node emits exactly one advertising event per second") {
  const Scenario s = make(R"({
    "duration_s": 600,
    "nodes": [{"period_ms": 1000}],
    "radio": {"adv_delay": false}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.member_events_sent == 600);
  // Every event is three PDUs, all evaluated at the always-listening relay.
  // The event starting exactly at the horizon ends past it, so 599 complete.
  CHECK(r.report.relay_counters.attempts == 3 * 599);
}

TEST_CASE("eleven nodes over an hour send 39600 advertising events") {
  const Scenario s = make(R"({
    "duration_s": 3600,
    "nodes": {"count": 11, "period_ms": 1000},
    "radio": {"adv_delay": false},
    "relay": {"policy": {"type": "batching", "nr_repeats": 0}}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.member_events_sent == 39600);
}

TEST_CASE("advDelay jitter preserves the long-run event count") {
  const Scenario s = make(R"({
    "duration_s": 600,
    "nodes": [{"period_ms": 1000}],
    "radio": {"adv_delay": true}
  })");
  const RunResult r = run_scenario(s);
  // Mean period is 1005 ms, so ~597 events; allow generous slack.
  CHECK(r.report.member_events_sent >= 580);
  CHECK(r.report.member_events_sent <= 600);
}

TEST_CASE("immediate policy echoes a clean solo node once per event") {
  const Scenario s = make(R"({
    "duration_s": 120,
    "nodes": [{"period_ms": 1000}],
    "radio": {"adv_delay": false},
    "relay": {"policy": {"type": "immediate"}}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.member_events_sent == 120);
  // All but the horizon-straddling final event come back as echoes.
  CHECK(r.report.echo_events_sent == 119);
  CHECK(r.report.nodes_to_relay == doctest::Approx(119.0 / 120.0));
}

TEST_CASE("duplicate_probability 1 doubles every immediate echo") {
  const Scenario s = make(R"({
    "duration_s": 120,
    "nodes": [{"period_ms": 1000}],
    "radio": {"adv_delay": false},
    "relay": {"duplicate_probability": 1.0, "policy": {"type": "immediate"}}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.echo_events_sent == 2 * (r.report.member_events_sent - 1));
}

TEST_CASE("batching echoes a fixed repeat count per heard origin") {
  // n1 is heard ~9 times in the 10 s listen phase, n2 once, n3 never.
  const std::string base = R"({
    "duration_s": 11,
    "nodes": [{"id": "n1", "period_ms": 1100},
              {"id": "n2", "period_ms": 7000},
              {"id": "n3", "period_ms": 1000}],
    "radio": {"adv_delay": false},
    "links": [{"from": "n3", "to": "relay", "p": 0}],
    "relay": {"policy": {"type": "batching", "listen_time_ms": 10000,
                         "nr_repeats": 5, "repeat_interval_ms": 10)";

  SUBCASE("repeat count is independent of how often an origin was heard") {
    const Scenario s = make(base + R"(}}})");
    const RunResult r = run_scenario(s);
    CHECK(r.report.relay_counters.counted >= 10);
    CHECK(r.report.echo_events_sent == 10);  // 5 for n1 + 5 for n2 + 0 for n3
  }

  SUBCASE("cap_repeats_at_count limits rarely-heard origins") {
    const Scenario s = make(base + R"(, "cap_repeats_at_count": true}}})");
    const RunResult r = run_scenario(s);
    CHECK(r.report.echo_events_sent == 6);  // 5 for n1 + 1 for n2
  }
}

TEST_CASE("nr_repeats 0 is a listening-only relay") {
  const Scenario s = make(R"({
    "duration_s": 60,
    "nodes": {"count": 3, "period_ms": 1000},
    "relay": {"policy": {"type": "batching", "nr_repeats": 0}}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.echo_events_sent == 0);
  CHECK(r.report.listen_ratio == 1.0);
  REQUIRE(r.report.nodes_to_relay.has_value());
  CHECK(*r.report.nodes_to_relay > 0.9);
}

TEST_CASE("noise devices are heard but filtered, never forwarded") {
  const Scenario s = make(R"({
    "duration_s": 60,
    "nodes": [{"period_ms": 60000}],
    "noise_nodes": {"count": 3, "period_ms": 250},
    "relay": {"policy": {"type": "immediate"}}
  })");
  const RunResult r = run_scenario(s);
  CHECK(r.report.relay_counters.filtered > 0);
  // Echoes can only come from the single slow member node.
  CHECK(r.report.echo_events_sent <= r.report.member_events_sent);
}

TEST_CASE("gateway processing dead time costs receptions") {
  const std::string base = R"({
    "duration_s": 120,
    "seed": 5,
    "nodes": {"count": 8, "period_ms": 200},
    "relay": {"policy": {"type": "batching", "nr_repeats": 0}},
    "gateway": {"processing_dead_time_us": )";
  const RunResult fast = run_scenario(make(base + "0}}"));
  const RunResult slow = run_scenario(make(base + "20000}}"));
  CHECK(slow.report.gateway_counters.losses.rx_busy >
        fast.report.gateway_counters.losses.rx_busy);
  CHECK(slow.report.gateway_counters.counted < fast.report.gateway_counters.counted);
}

TEST_CASE("a sleeping relay loses packets to the sleep phase") {
  const Scenario s = make(R"({
    "duration_s": 120,
    "nodes": {"count": 4, "period_ms": 500},
    "relay": {"sleep_time_ms": 10000,
              "policy": {"type": "batching", "listen_time_ms": 2500,
                         "nr_repeats": 2, "repeat_interval_ms": 10}}
  })");
  RunOptions opts;
  opts.collect_state_logs = true;
  const RunResult r = run_scenario(s, opts);
  CHECK(r.report.relay_counters.losses.asleep > 0);
  CHECK(r.report.configured_duty < 0.25);
  CHECK(r.report.measured_duty ==
        doctest::Approx(r.report.configured_duty).epsilon(0.1));
}

TEST_CASE("identical runs are identical, different seeds are not") {
  const std::string text = R"({
    "duration_s": 60,
    "seed": 11,
    "nodes": {"count": 5, "period_ms": 300},
    "relay": {"policy": {"type": "immediate"}}
  })";
  RunOptions opts;
  opts.collect_trace = true;
  const RunResult a = run_scenario(make(text), opts);
  const RunResult b = run_scenario(make(text), opts);
  CHECK(a.trace_lines == b.trace_lines);
  CHECK(a.report.nodes_to_relay == b.report.nodes_to_relay);
  CHECK(a.events_dispatched == b.events_dispatched);

  Scenario other = make(text);
  other.seed = 12;
  const RunResult c = run_scenario(other, opts);
  CHECK(a.trace_lines != c.trace_lines);
}

TEST_CASE("trace lines are tab-separated and time-ordered") {
  const Scenario s = make(R"({
    "duration_s": 5,
    "nodes": [{"period_ms": 1000}],
    "relay": {"policy": {"type": "immediate"}}
  })");
  RunOptions opts;
  opts.collect_trace = true;
  const RunResult r = run_scenario(s, opts);
  REQUIRE(!r.trace_lines.empty());
  long long last = -1;
  for (const std::string& line : r.trace_lines) {
    const auto t1 = line.find('\t');
    REQUIRE(t1 != std::string::npos);
    const long long at = std::stoll(line.substr(0, t1));
    CHECK(at >= last);
    last = at;
    // time, device, kind, detail
    int tabs = 0;
    for (char c : line) tabs += (c == '\t');
    CHECK(tabs == 3);
  }
}
