#include "dr/rng.hpp"

#include <cmath>

namespace dr::rng {

namespace {

uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

uint64_t fnv1a64(std::string_view s) {
  uint64_t hash = 0xCBF29CE484222325ull;
  for (const char c : s) {
    hash ^= static_cast<uint8_t>(c);
    hash *= 0x100000001B3ull;
  }
  return hash;
}

Rng::Rng(uint64_t seed) {
  uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

uint64_t Rng::next_u64() {
  const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_double() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

uint32_t Rng::next_below(uint32_t bound) {
  // rejection sampling keeps the draw unbiased
  const uint64_t span = uint64_t(bound);
  const uint64_t limit = (~0ull / span) * span;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<uint32_t>(v % span);
}

double Rng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = next_double();
  } while (u1 <= 0.0);
  const double u2 = next_double();
  const double mag = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * M_PI * u2;
  spare_ = mag * std::sin(ang);
  has_spare_ = true;
  return mag * std::cos(ang);
}

uint64_t derive_stream(uint64_t seed, std::string_view name) {
  uint64_t mix = seed ^ rotl(fnv1a64(name), 32);
  return splitmix64(mix);
}

}  // namespace dr::rng
