#pragma once

#include <cstdint>

namespace ponplan {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen because the whole recurrence
// fits in four lines and is trivially reproduced in any language, which keeps
// seeded demand streams identical across reimplementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform draw in [0, n) via the 128-bit multiply-shift reduction.
  // Consumes exactly one next() per call, so generated sequences are
  // prefix-stable: the first k draws do not depend on how many follow.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ponplan
