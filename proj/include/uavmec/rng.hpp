#pragma once

#include <cstdint>
#include <random>

namespace uavmec {

using Rng = std::mt19937_64;

// Independent named streams derived from one run seed. Keeping environment
// noise and agent exploration on separate streams lets agents compared on
// the same seed see the same task draws and mobility noise sequence.
enum class Stream : std::uint32_t {
  kEnvironment = 1,
  kAgent = 2,
  kEvaluation = 3,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace uavmec
