#pragma once

// Shared plumbing: deterministic RNG, seed hashing, value noise, errors.
// Everything downstream keys its randomness off hash_combine chains so that
// per-item parallel execution and serial execution agree bit-exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace advwt {

inline constexpr const char* kToolVersion = "0.1.0";

// Configuration problems (bad CLI args, bad config files, missing inputs).
// The CLI maps these to exit code 1, everything else to 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return mix64(seed + kGamma + mix64(v + kGamma));
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return hash_combine(hash_combine(a, b), c);
}

inline std::uint64_t hash4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
  return hash_combine(hash3(a, b, c), d);
}

// splitmix64 stream. Small, fast, and identical on every platform we build
// on; std::<distribution> output is implementation-defined, so none of the
// reproducible paths use it.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix64(state_);
  }

  // [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased-enough for shuffles at desk scale.
  std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Box-Muller; the pair is cached so consecutive calls cost one transform.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stateless [0,1) value from a key; used by lattice noise and per-pixel
// effects where the value must depend on coordinates, not traversal order.
inline double unit_from_hash(std::uint64_t key) {
  return static_cast<double>(mix64(key) >> 11) * 0x1.0p-53;
}

}  // namespace rng

namespace noise {

// quintic fade, C2-continuous at lattice points
inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lattice(std::uint64_t seed, std::int64_t xi, std::int64_t yi) {
  return rng::unit_from_hash(rng::hash3(seed, static_cast<std::uint64_t>(xi),
                                        static_cast<std::uint64_t>(yi) ^ 0xABCDEF1234567ull));
}

// Smooth value noise in [0,1]; x, y in lattice units.
inline double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto xi = static_cast<std::int64_t>(fx);
  const auto yi = static_cast<std::int64_t>(fy);
  const double tx = fade(x - fx);
  const double ty = fade(y - fy);
  const double v00 = lattice(seed, xi, yi);
  const double v10 = lattice(seed, xi + 1, yi);
  const double v01 = lattice(seed, xi, yi + 1);
  const double v11 = lattice(seed, xi + 1, yi + 1);
  const double a = v00 + (v10 - v00) * tx;
  const double b = v01 + (v11 - v01) * tx;
  return a + (b - a) * ty;
}

// Fractional Brownian stack of value noise, normalized back to [0,1].
// x, y in unit image coordinates; base_freq in cycles across the image.
inline double fbm(std::uint64_t seed, double x, double y, int octaves,
                  double base_freq, double gain = 0.5) {
  double sum = 0.0;
  double amp = 1.0;
  double norm = 0.0;
  double freq = base_freq;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(rng::hash_combine(seed, static_cast<std::uint64_t>(o)),
                             x * freq, y * freq);
    norm += amp;
    amp *= gain;
    freq *= 2.0;
  }
  return sum / norm;
}

inline double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

}  // namespace noise
}  // namespace advwt
