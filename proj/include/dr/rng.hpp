#pragma once

#include <cstdint>
#include <string_view>

namespace dr::rng {

// FNV-1a 64-bit hash, used to derive independent stream ids from names.
uint64_t fnv1a64(std::string_view s);

// xoshiro256++ seeded via SplitMix64. All draws are reproducible across
// platforms; no standard-library distributions are involved.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1).
  double next_double();
  // Uniform integer in [0, bound). bound must be > 0.
  uint32_t next_below(uint32_t bound);
  // Standard normal via Box-Muller.
  double next_gaussian();

 private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream id for a named entity under a corpus seed: mixes the seed with the
// hash of the name so per-file streams are independent of generation order.
uint64_t derive_stream(uint64_t seed, std::string_view name);

}  // namespace dr::rng
