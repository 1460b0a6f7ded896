#pragma once

#include <cstdint>
#include <random>

namespace risdelay {

using Rng = std::mt19937_64;

// Independent random streams keyed by purpose. Keeping every consumer on its
// own stream is what makes paired-seed comparisons consume identical channel
// and arrival realizations regardless of policy or RIS size.
enum class Stream : std::uint64_t {
  kPositions = 1,
  kDirectLink = 2,
  kBsRisLink = 3,
  kRisUserLink = 4,
  kArrivals = 5,
  kPolicy = 6,
  kInit = 7,
  kShuffle = 8,
  kGeometry = 9,
  kTrainEpisode = 10,
  kEvalEpisode = 11,
};

std::uint64_t splitmix64(std::uint64_t x);

// Derives a well-mixed seed from (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace risdelay
