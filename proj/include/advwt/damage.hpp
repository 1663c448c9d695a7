#pragma once

// Latent-style wear-and-tear synthesis: a noise-to-style mapper M(z), a
// fixed interpretation of the style code as damage channels, and the
// deterministic generator G(x; s). Contracts that matter downstream:
//   - G(x, 0, seed) == x bit-exactly (every effect is skipped at zero),
//   - identical (x, s, seed) give bit-identical output,
//   - output varies smoothly in s (no hard thresholds anywhere), so small
//     code perturbations cannot flip pixels by large amounts.

#include <cmath>
#include <cstdint>
#include <vector>

#include "advwt/image.hpp"

namespace advwt {

struct StyleCode {
  std::vector<double> values;

  StyleCode() = default;
  explicit StyleCode(std::size_t n, double fill = 0.0) : values(n, fill) {}

  std::size_t dim() const { return values.size(); }
};

struct NoiseVector {
  std::vector<double> values;
};

struct DamageChannels {
  double fade = 0;               // [0,1]
  double crack_density = 0;      // [0,1]
  double crack_orientation = 0;  // radians
  double dirt_intensity = 0;     // [0,1]
  double dirt_scale = 0;         // [0,1]
  double rust_intensity = 0;     // [0,1]
  double rust_hue_shift = 0;     // [-1,1]
  double peel_intensity = 0;     // [0,1]
};

inline constexpr int kDefaultStyleDim = 64;
inline constexpr int kDefaultNoiseDim = 16;

// Affine map W z + b with entries from seeded N(0, 1/Z), squashed through
// 0.8*tanh. Materialized once per run and shared read-only.
struct StyleMapper {
  int style_dim = kDefaultStyleDim;
  int noise_dim = kDefaultNoiseDim;
  std::vector<double> weights;  // style_dim x noise_dim, row-major
  std::vector<double> bias;     // style_dim

  static StyleMapper seeded(std::uint64_t mapper_seed, int n = kDefaultStyleDim,
                            int z = kDefaultNoiseDim) {
    StyleMapper m;
    m.style_dim = n;
    m.noise_dim = z;
    m.weights.resize(static_cast<std::size_t>(n) * z);
    m.bias.resize(n);
    rng::Rng r(rng::hash_combine(mapper_seed, 0x517E4A9ull));
    const double scale = 1.0 / std::sqrt(static_cast<double>(z));
    for (double& w : m.weights) w = r.normal() * scale;
    for (double& b : m.bias) b = r.normal() * scale;
    return m;
  }

  StyleCode map(const NoiseVector& z) const {
    if (static_cast<int>(z.values.size()) != noise_dim)
      throw std::invalid_argument("StyleMapper: noise dimension mismatch");
    StyleCode s(static_cast<std::size_t>(style_dim));
    for (int i = 0; i < style_dim; ++i) {
      double acc = bias[i];
      const double* row = &weights[static_cast<std::size_t>(i) * noise_dim];
      for (int j = 0; j < noise_dim; ++j) acc += row[j] * z.values[j];
      s.values[i] = 0.8 * std::tanh(acc);
    }
    return s;
  }
};

inline StyleCode map_noise_to_style(const NoiseVector& z, std::uint64_t mapper_seed,
                                    int style_dim = kDefaultStyleDim) {
  return StyleMapper::seeded(mapper_seed, style_dim,
                             static_cast<int>(z.values.size()))
      .map(z);
}

// Eight contiguous groups; intensities via |tanh(mean)|, orientation via
// mean*pi, hue shift via tanh(mean). A zero code maps to all-zero channels.
inline DamageChannels style_to_channels(const StyleCode& s) {
  const int n = static_cast<int>(s.dim());
  if (n < 16) throw ConfigError("style_to_channels: style dimension < 16");
  double means[8];
  for (int g = 0; g < 8; ++g) {
    const int lo = g * n / 8;
    const int hi = (g + 1) * n / 8;
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) acc += s.values[i];
    means[g] = acc / (hi - lo);
  }
  DamageChannels c;
  c.fade = std::abs(std::tanh(means[0]));
  c.crack_density = std::abs(std::tanh(means[1]));
  c.crack_orientation = means[2] * std::numbers::pi;
  c.dirt_intensity = std::abs(std::tanh(means[3]));
  c.dirt_scale = std::abs(std::tanh(means[4]));
  c.rust_intensity = std::abs(std::tanh(means[5]));
  c.rust_hue_shift = std::tanh(means[6]);
  c.peel_intensity = std::abs(std::tanh(means[7]));
  return c;
}

namespace detail {

inline Rgb hue_rotate(const Rgb& c, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double m00 = ca + (1.0 - ca) / 3.0;
  const double m01 = (1.0 - ca) / 3.0 - std::sqrt(1.0 / 3.0) * sa;
  const double m02 = (1.0 - ca) / 3.0 + std::sqrt(1.0 / 3.0) * sa;
  return Rgb{static_cast<float>(m00 * c.r + m01 * c.g + m02 * c.b),
             static_cast<float>(m02 * c.r + m00 * c.g + m01 * c.b),
             static_cast<float>(m01 * c.r + m02 * c.g + m00 * c.b)};
}

// Smooth ramp: 0 below lo, quadratic rise to 1 at hi. No derivative blowup.
inline double ramp2(double x, double lo, double hi) {
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return t * t;
}

}  // namespace detail

// Composites fade, cracks, dirt, rust, peel in that fixed order.
inline Image generate_damaged(const Image& x, const StyleCode& s,
                              std::uint64_t texture_seed) {
  const DamageChannels ch = style_to_channels(s);
  Image out = x;

  const int w = x.width, h = x.height;
  const double inv_w = 1.0 / w, inv_h = 1.0 / h;
  const std::uint64_t seed_crack = rng::hash_combine(texture_seed, 1);
  const std::uint64_t seed_dirt = rng::hash_combine(texture_seed, 2);
  const std::uint64_t seed_rust = rng::hash_combine(texture_seed, 3);
  const std::uint64_t seed_rust_tex = rng::hash_combine(texture_seed, 4);
  const std::uint64_t seed_peel = rng::hash_combine(texture_seed, 5);

  // 1. fade: per-pixel convex mix toward a mid-compressed gray value
  if (ch.fade > 0.0) {
    const double a = 0.95 * ch.fade;
    const double pull = 0.55 * ch.fade;
    for (int py = 0; py < h; ++py)
      for (int px = 0; px < w; ++px) {
        const double lum = out.luma(py, px);
        const double gray = lum + (0.5 - lum) * pull;
        for (int c = 0; c < out.channels; ++c) {
          const double v = out.at(py, px, c);
          out.at(py, px, c) = clamp01(static_cast<float>(v + (gray - v) * a));
        }
      }
  }

  // 2. cracks: ridged band-limited noise in coordinates rotated by the
  // orientation channel and compressed across it; darkening strokes that
  // widen as the density channel grows
  if (ch.crack_density > 0.0) {
    const double ca = std::cos(ch.crack_orientation);
    const double sa = std::sin(ch.crack_orientation);
    const double amp = 1.0 * ch.crack_density;
    const double lo = 0.52 - 0.32 * ch.crack_density;
    for (int py = 0; py < h; ++py)
      for (int px = 0; px < w; ++px) {
        const double cx = (px + 0.5) * inv_w - 0.5;
        const double cy = (py + 0.5) * inv_h - 0.5;
        const double ur = ca * cx - sa * cy;
        const double vr = (sa * cx + ca * cy) * 1.8;
        const double n = noise::fbm(seed_crack, ur + 0.5, vr + 0.5, 4, 3.5);
        const double ridge = 1.0 - std::abs(2.0 * n - 1.0);
        const double mask = detail::ramp2(ridge, lo, 1.0);
        if (mask <= 0.0) continue;
        const double f = 1.0 - amp * mask;
        for (int c = 0; c < out.channels; ++c)
          out.at(py, px, c) = clamp01(static_cast<float>(out.at(py, px, c) * f));
      }
  }

  // 3. dirt: low-frequency blotches, multiplicative darkening with a brown
  // cast; dirt_scale moves the blotch frequency, intensity both deepens and
  // widens the blotches
  if (ch.dirt_intensity > 0.0) {
    const double freq = 1.5 + 3.5 * ch.dirt_scale;
    const double lo = 0.42 - 0.36 * ch.dirt_intensity;
    static constexpr double kCast[3] = {0.85, 0.93, 1.00};
    for (int py = 0; py < h; ++py)
      for (int px = 0; px < w; ++px) {
        const double u = (px + 0.5) * inv_w;
        const double v = (py + 0.5) * inv_h;
        const double n = noise::fbm(seed_dirt, u, v, 2, freq);
        const double mask = detail::ramp2(n, lo, 0.95);
        if (mask <= 0.0) continue;
        const double k = 0.97 * ch.dirt_intensity * mask;
        for (int c = 0; c < out.channels; ++c) {
          const double f = 1.0 - k * (out.channels == 3 ? kCast[c] : 1.0);
          out.at(py, px, c) = clamp01(static_cast<float>(out.at(py, px, c) * f));
        }
      }
  }

  // 4. rust: hue-shifted overlay on patch mask with fine texture; patches
  // spread across the face as intensity grows
  if (ch.rust_intensity > 0.0) {
    const Rgb base = detail::hue_rotate(Rgb{0.45f, 0.22f, 0.10f},
                                        0.9 * ch.rust_hue_shift);
    const double lo = 0.55 - 0.42 * ch.rust_intensity;
    for (int py = 0; py < h; ++py)
      for (int px = 0; px < w; ++px) {
        const double u = (px + 0.5) * inv_w;
        const double v = (py + 0.5) * inv_h;
        const double pm = noise::fbm(seed_rust, u, v, 3, 3.0);
        const double mask = detail::ramp2(pm, lo, 0.95);
        if (mask <= 0.0) continue;
        const double shade = 0.75 + 0.25 * noise::fbm(seed_rust_tex, u, v, 2, 9.0);
        const double a = 0.95 * ch.rust_intensity * mask;
        const float rgb[3] = {static_cast<float>(base.r * shade),
                              static_cast<float>(base.g * shade),
                              static_cast<float>(base.b * shade)};
        for (int c = 0; c < out.channels; ++c) {
          const float target = out.channels == 3 ? rgb[c] : rgb[0];
          const double vv = out.at(py, px, c);
          out.at(py, px, c) = clamp01(static_cast<float>(vv + (target - vv) * a));
        }
      }
  }

  // 5. peel: bright blisters where the paint layer lifts; high intensity
  // merges speckles into bare patches
  if (ch.peel_intensity > 0.0) {
    const double lo = 0.62 - 0.50 * ch.peel_intensity;
    for (int py = 0; py < h; ++py)
      for (int px = 0; px < w; ++px) {
        const double u = (px + 0.5) * inv_w;
        const double v = (py + 0.5) * inv_h;
        const double sp = noise::value_noise(seed_peel, u * 18.0, v * 18.0);
        const double mask = detail::ramp2(sp, lo, 0.95);
        if (mask <= 0.0) continue;
        const double a = 0.95 * ch.peel_intensity * mask;
        for (int c = 0; c < out.channels; ++c) {
          const double vv = out.at(py, px, c);
          const double target = (c == 2) ? 0.88 : 0.92;
          out.at(py, px, c) = clamp01(static_cast<float>(vv + (target - vv) * a));
        }
      }
  }

  return out;
}

}  // namespace advwt
