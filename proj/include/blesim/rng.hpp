#pragma once

#include <cstdint>
#include <stdexcept>

namespace blesim {

// Counter-free splitmix64 stream. One stream per device: adding or removing
// a device never perturbs the draw sequence of any other device.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform in [0, 1).
  double uniform01();

 private:
  std::uint64_t state_;
};

}  // namespace blesim
