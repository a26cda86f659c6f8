#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gnnbench {

/// SplitMix64 finalizer. Bijective on 64-bit words, used both as the
/// counter-mix of RngStream and as the step of seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// FNV-1a over an arbitrary byte sequence; the basis of stable stream keys.
inline std::uint64_t fnv1a(std::uint64_t h, const void* bytes, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::uint64_t hash_u64(std::uint64_t h, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  return fnv1a(h, b, 8);
}

inline std::uint64_t hash_str(std::uint64_t h, std::string_view s) {
  h = fnv1a(h, s.data(), s.size());
  return fnv1a(h, "\0", 1);  // length delimiter
}

/// Stable 64-bit run seed for (base_seed, model, replicate). Adding or
/// removing a model never perturbs another model's seed.
inline std::uint64_t derive_run_seed(std::uint64_t base_seed, std::string_view model,
                                     std::uint64_t replicate) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  h = hash_u64(h, base_seed);
  h = hash_str(h, model);
  h = hash_u64(h, replicate);
  return mix64(h);
}

/// Counter-based pseudo-random stream: output i is mix64(key + i * phi).
/// Streams with distinct keys are independent; a stream never mutates
/// anything but its own counter, so draws are reproducible by construction.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  /// Derives an independent purpose-tagged stream (e.g. "split", "dropout").
  static RngStream derive(std::uint64_t seed, std::string_view purpose) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    h = hash_u64(h, seed);
    h = hash_str(h, purpose);
    return RngStream(mix64(h));
  }

  std::uint64_t next_u64() { return mix64(key_ + counter_++ * 0x9E3779B97F4A7C15ull); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n); n must be > 0. Rejection keeps it unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal via Box-Muller; second value cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gnnbench
