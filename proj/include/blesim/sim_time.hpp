#pragma once

#include <cstdint>

namespace blesim {

// Simulation time in integer microseconds since run start. Millisecond
// resolution would alias sub-millisecond packet airtimes.
using SimTime = std::int64_t;

constexpr SimTime usec(std::int64_t v) { return v; }
constexpr SimTime msec(std::int64_t v) { return v * 1000; }
constexpr SimTime sec(std::int64_t v) { return v * 1'000'000; }

}  // namespace blesim
