#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hammer {

// Deterministic random stream. All distribution transforms are implemented
// explicitly (std::mt19937_64 is specified by the standard, the distribution
// adaptors are not), so a given seed yields the same draws on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. No spare is cached: exactly two uniform
  // draws per call, which keeps stream consumption easy to reason about.
  double normal();

  // Uniform integer in [0, n).
  int uniform_int(int n);

 private:
  std::mt19937_64 engine_;
};

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view s);

// Named substream of a master seed. The derivation is
// splitmix64(master_seed ^ fnv1a64(name)); it is part of the on-disk
// reproducibility contract, so runs with the same master seed consume
// identical streams regardless of which other streams exist.
Rng named_stream(uint64_t master_seed, std::string_view name);

// Fisher-Yates with our own uniform_int, for pinned shuffle order.
void shuffle_indices(std::vector<int>& idx, Rng& rng);

}  // namespace hammer
