#pragma once

// Raster images: the currency every other module trades in. Row-major
// float32 in [0,1], 1 or 3 channels. All transforms are pure functions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "advwt/common.hpp"

namespace advwt {

struct Rgb {
  float r = 0, g = 0, b = 0;
};

struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> data;  // row-major, interleaved channels

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
      throw std::invalid_argument("Image: bad dimensions");
  }

  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  // Rec.601 luma; identity for single-channel images.
  float luma(int y, int x) const {
    if (channels == 1) return at(y, x, 0);
    return 0.299f * at(y, x, 0) + 0.587f * at(y, x, 1) + 0.114f * at(y, x, 2);
  }

  void validate() const {
    if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
      throw std::invalid_argument("Image: bad dimensions");
    if (data.size() != pixel_count() * channels)
      throw std::invalid_argument("Image: data length mismatch");
    for (float v : data)
      if (!(v >= 0.0f && v <= 1.0f))
        throw std::invalid_argument("Image: value outside [0,1]");
  }
};

inline float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

// Bilinear resize with edge clamping. Identical dimensions reproduce the
// input bit-exactly (the sample lands on the source pixel with zero frac).
inline Image resize(const Image& img, int new_w, int new_h) {
  if (new_w < 1 || new_h < 1) throw std::invalid_argument("resize: zero target dimension");
  Image out(new_w, new_h, img.channels);
  const double sx = static_cast<double>(img.width) / new_w;
  const double sy = static_cast<double>(img.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    const double ty = fy - y0;
    int y1 = std::min(y0 + 1, img.height - 1);
    y0 = std::clamp(y0, 0, img.height - 1);
    y1 = std::clamp(y1, 0, img.height - 1);
    for (int x = 0; x < new_w; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      const double tx = fx - x0;
      int x1 = std::min(x0 + 1, img.width - 1);
      x0 = std::clamp(x0, 0, img.width - 1);
      x1 = std::clamp(x1, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) {
        const double v00 = img.at(y0, x0, c);
        const double v10 = img.at(y0, x1, c);
        const double v01 = img.at(y1, x0, c);
        const double v11 = img.at(y1, x1, c);
        const double top = v00 + (v10 - v00) * tx;
        const double bot = v01 + (v11 - v01) * tx;
        out.at(y, x, c) = clamp01(static_cast<float>(top + (bot - top) * ty));
      }
    }
  }
  return out;
}

inline Image to_gray(const Image& img) {
  Image out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out.at(y, x, 0) = img.luma(y, x);
  return out;
}

// --- environmental corruptions -------------------------------------------

enum class CorruptionKind { Brightness, Blur, Fog, Snow };

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::Brightness;
  int severity = 0;  // 0 = identity, 1..5 monotone strength
};

inline const char* corruption_name(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::Brightness: return "brightness";
    case CorruptionKind::Blur: return "blur";
    case CorruptionKind::Fog: return "fog";
    case CorruptionKind::Snow: return "snow";
  }
  return "?";
}

inline CorruptionKind corruption_from_name(const std::string& s) {
  if (s == "brightness") return CorruptionKind::Brightness;
  if (s == "blur") return CorruptionKind::Blur;
  if (s == "fog") return CorruptionKind::Fog;
  if (s == "snow") return CorruptionKind::Snow;
  throw ConfigError("unknown corruption kind: " + s);
}

namespace detail {

// Severity tables, fixed for reproducibility.
inline constexpr double kBrightnessOffset[6] = {0, 0.1, 0.2, 0.3, 0.4, 0.5};
inline constexpr double kBlurSigma[6] = {0, 0.5, 1.0, 2.0, 3.0, 4.0};
inline constexpr double kFogAlpha[6] = {0, 0.1, 0.2, 0.3, 0.45, 0.6};
inline constexpr int kSnowCount[6] = {0, 10, 25, 50, 100, 200};

// Separable Gaussian blur with reflect padding so constant regions stay
// constant and interior mass is conserved.
inline Image gaussian_blur(const Image& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;

  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - i - 1;
    }
    return i;
  };

  Image tmp(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * img.at(y, reflect(x + i, img.width), c);
        tmp.at(y, x, c) = static_cast<float>(acc);
      }
  Image out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * tmp.at(reflect(y + i, img.height), x, c);
        out.at(y, x, c) = clamp01(static_cast<float>(acc));
      }
  return out;
}

}  // namespace detail

// Deterministic in (img, spec, seed). Severity 0 returns the input verbatim.
inline Image apply_corruption(const Image& img, const CorruptionSpec& spec,
                              std::uint64_t seed) {
  if (spec.severity < 0 || spec.severity > 5)
    throw std::invalid_argument("apply_corruption: severity out of [0,5]");
  if (spec.severity == 0) return img;

  switch (spec.kind) {
    case CorruptionKind::Brightness: {
      const double b = detail::kBrightnessOffset[spec.severity];
      Image out = img;
      for (float& v : out.data) v = clamp01(static_cast<float>(v + b));
      return out;
    }
    case CorruptionKind::Blur:
      return detail::gaussian_blur(img, detail::kBlurSigma[spec.severity]);
    case CorruptionKind::Fog: {
      const double a = detail::kFogAlpha[spec.severity];
      Image out = img;
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          const double u = (x + 0.5) / img.width;
          const double v = (y + 0.5) / img.height;
          // low-frequency density field, brighter than any sign content
          const double field = 0.6 + 0.4 * noise::fbm(seed, u, v, 2, 2.0);
          const double w = a * field;
          for (int c = 0; c < img.channels; ++c) {
            const double src = img.at(y, x, c);
            out.at(y, x, c) = clamp01(static_cast<float>(src * (1.0 - w) + w));
          }
        }
      return out;
    }
    case CorruptionKind::Snow: {
      Image out = img;
      const int n = detail::kSnowCount[spec.severity];
      rng::Rng r(rng::hash_combine(seed, 0x5107u));
      const double len = 0.08 * std::max(img.width, img.height);
      for (int i = 0; i < n; ++i) {
        const double cx = r.uniform(0, img.width);
        const double cy = r.uniform(0, img.height);
        const double ang = (-65.0 + r.uniform(-15.0, 15.0)) * std::numbers::pi / 180.0;
        const double dx = std::cos(ang), dy = -std::sin(ang);
        const double bright = r.uniform(0.75, 0.95);
        const int steps = std::max(2, static_cast<int>(len));
        for (int s = 0; s <= steps; ++s) {
          const double t = (static_cast<double>(s) / steps - 0.5) * len;
          const int px = static_cast<int>(std::lround(cx + t * dx));
          const int py = static_cast<int>(std::lround(cy + t * dy));
          if (px < 0 || px >= img.width || py < 0 || py >= img.height) continue;
          for (int c = 0; c < img.channels; ++c)
            out.at(py, px, c) = std::max(out.at(py, px, c), static_cast<float>(bright));
        }
      }
      return out;
    }
  }
  throw std::logic_error("apply_corruption: unreachable");
}

}  // namespace advwt
