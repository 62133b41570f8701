#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace locgibbs {

// splitmix64 generator. One word of state, trivially cheap to seed, and the
// output sequence is fixed by the standard constants, so results are
// reproducible across platforms and compilers (unlike the std distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1); never returns 0 or 1, so quantile
  // transforms stay finite.
  double next_u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Multiply-shift; the O(2^-53) bias is
  // irrelevant for permutation generation.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::uint32_t> permutation(std::uint32_t n);

 private:
  std::uint64_t state_;
};

// Deterministic combination of seed components (track index, time index,
// sample layer, ...) into one 64-bit stream seed.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

}  // namespace locgibbs
