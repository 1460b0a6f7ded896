#include "risdelay/rng.hpp"

#include <cmath>

#include "risdelay/common.hpp"

namespace risdelay {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  return splitmix64(h ^ (index * 0xd1b54a32d192ed03ULL));
}

double canonical_phase(double theta) {
  double wrapped = std::fmod(theta, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  // fmod can return exactly 2pi after the shift for tiny negative inputs
  if (wrapped >= kTwoPi) wrapped = 0.0;
  return wrapped;
}

void canonicalize_phases(std::span<double> phases) {
  for (double& p : phases) p = canonical_phase(p);
}

}  // namespace risdelay
