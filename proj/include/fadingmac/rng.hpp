// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace fadingmac {

// Counter-based generator: every variate is a pure function of
// (seed, block, stream), so any partition of blocks across workers
// reproduces the same draws. `stream` separates the per-user gain
// draws and any auxiliary randomness inside one block.
namespace rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t block,
                          std::uint64_t stream) noexcept {
  std::uint64_t z = mix64(seed + kGamma);
  z = mix64(z ^ (block * 0xc2b2ae3d27d4eb4fULL + kGamma));
  z = mix64(z ^ (stream * 0xd6e8feb86659fd93ULL + kGamma));
  return z;
}

/// Uniform double strictly inside (0,1).
inline double uniform(std::uint64_t seed, std::uint64_t block,
                      std::uint64_t stream) noexcept {
  const std::uint64_t h = hash(seed, block, stream);
  return static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace rng

/// One block's worth of randomness, indexed by stream.
class BlockRng {
 public:
  BlockRng(std::uint64_t seed, std::uint64_t block) noexcept
      : seed_(seed), block_(block) {}

  double uniform(std::uint64_t stream) const noexcept {
    return rng::uniform(seed_, block_, stream);
  }
  std::uint64_t bits(std::uint64_t stream) const noexcept {
    return rng::hash(seed_, block_, stream);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t block_;
};

}  // namespace fadingmac
