#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace relulab {

// SplitMix64 finalizer. Adjacent integer seeds map to decorrelated states, so
// it is safe to derive per-replicate seeds from (base_seed, replicate_index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed mixing used everywhere a run needs its own stream: start from
// splitmix64(base) and fold each part with xor + another splitmix64 pass.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

// Deterministic generator wrapper. Identical seeds give identical streams
// within one build of the artifact.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return unif_(engine_); }

  // Standard normal.
  double normal() { return normal_(engine_); }

  SeededRng derive(std::uint64_t stream) const {
    return SeededRng(derive_seed(seed_, {stream}));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace relulab
