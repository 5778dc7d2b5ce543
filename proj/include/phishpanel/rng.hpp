// Deterministic random number streams. Each logical unit of work (an
// employee path, a campaign-effects block, a replication) gets its own
// splitmix64 substream derived from (seed, stream id), so parallel and
// serial execution consume identical draws and outputs are byte-stable
// across platforms and thread counts. No std:: distributions are used
// because their outputs are implementation-defined.
#pragma once

#include <cstdint>

#include "phishpanel/normal.hpp"

namespace phishpanel {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    // Mix seed and stream id through two rounds so adjacent stream ids do
    // not produce correlated openings.
    std::uint64_t s = seed;
    splitmix64_next(s);
    s ^= 0x632be59bd9b4e019ULL * (stream_id + 1);
    splitmix64_next(s);
    state_ = s;
  }

  std::uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform on [0,1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1): never exactly 0, safe for quantile transforms.
  double next_uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() { return normal_quantile(next_uniform_open()); }

  bool next_bernoulli(double p) { return next_uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace phishpanel
