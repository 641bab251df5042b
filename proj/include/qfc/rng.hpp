#pragma once

#include <cstdint>
#include <random>

namespace qfc {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for ensemble member `index` of a run seeded with `seed`. Streams for
// different indices are decorrelated by two rounds of splitmix64.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// Standard-normal source with its engine. Owned per trajectory.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed = 0) : engine_(seed) {}

  double operator()() { return normal_(engine_); }
  Rng& engine() { return engine_; }

 private:
  Rng engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qfc
