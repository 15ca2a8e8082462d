#pragma once

#include <array>
#include <cstdint>

namespace rsgda {

// One block of the Philox4x64-10 keyed permutation. Counter-based: the output
// is a pure function of (counter, key), so any position in any stream can be
// regenerated without replaying earlier draws.
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

// Splittable, replayable random stream.
//
// A stream is identified by a 128-bit key. Sequential draws walk the counter
// (counter word 3 == 0); split() derives a child key through the permutation
// itself in a disjoint counter domain (word 3 == 1), so children are
// independent of the parent's draw position and of each other.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{seed, stream} {}

  // Child stream for `substream`; does not consume or disturb parent state.
  Rng split(std::uint64_t substream) const;

  std::uint64_t u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double unit() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform on {0, ..., n-1}, unbiased (rejection).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller; caches the paired deviate.
  double normal();

 private:
  std::array<std::uint64_t, 2> key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int cursor_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rsgda
