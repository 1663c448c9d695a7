#pragma once

// Perturbation structure analysis and image quality: delta extraction,
// spectral entropy of the 2D DFT, spatial coverage, connected-region
// statistics, and single-scale SSIM.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "advwt/image.hpp"

namespace advwt {

struct Perturbation {
  int width = 0, height = 0, channels = 0;
  std::vector<float> data;  // signed, in [-1, 1]

  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct PerturbationStats {
  double fourier_entropy_bits = 0;
  double spatial_coverage_pct = 0;
  double largest_region_ratio = 0;
  double mean_elongation = 1;
  double ssim = 1;
};

inline Perturbation compute_delta(const Image& x_adv, const Image& x_clean) {
  if (!x_adv.same_shape(x_clean)) throw std::invalid_argument("compute_delta: shape mismatch");
  Perturbation d;
  d.width = x_adv.width;
  d.height = x_adv.height;
  d.channels = x_adv.channels;
  d.data.resize(x_adv.data.size());
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] = x_adv.data[i] - x_clean.data[i];
  return d;
}

// --- DFT ------------------------------------------------------------------

namespace dft {

// 1D DFT of length n: radix-2 FFT when n is a power of two, direct O(n^2)
// otherwise. Desk-scale planes are small enough that the fallback is fine.
inline void dft_1d(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if ((n & (n - 1)) == 0) {
    // iterative radix-2 Cooley-Tukey
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
      const std::complex<double> wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        std::complex<double> w(1.0);
        for (std::size_t k = 0; k < len / 2; ++k) {
          const auto u = a[i + k];
          const auto v = a[i + k + len / 2] * w;
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc(0.0);
      for (std::size_t t = 0; t < n; ++t) {
        const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
        acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      out[k] = acc;
    }
    a = std::move(out);
  }
}

}  // namespace dft

// Row-column 2D DFT of a real plane (row-major, height rows of width).
inline std::vector<std::complex<double>> dft2d(const std::vector<double>& plane,
                                               int width, int height) {
  std::vector<std::complex<double>> f(plane.begin(), plane.end());
  std::vector<std::complex<double>> row(width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) row[x] = f[static_cast<std::size_t>(y) * width + x];
    dft::dft_1d(row);
    for (int x = 0; x < width; ++x) f[static_cast<std::size_t>(y) * width + x] = row[x];
  }
  std::vector<std::complex<double>> col(height);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) col[y] = f[static_cast<std::size_t>(y) * width + x];
    dft::dft_1d(col);
    for (int y = 0; y < height; ++y) f[static_cast<std::size_t>(y) * width + x] = col[y];
  }
  return f;
}

// Shannon entropy in bits of a non-negative weight vector (normalized
// internally). All-zero input yields 0 by convention.
inline double shannon_entropy_bits(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double w : weights) {
    if (w <= 0.0) continue;
    const double p = w / total;
    h -= p * std::log2(p);
  }
  return h;
}

enum class EntropyMode { OrientationBins, FullSpectrum };

inline double fourier_entropy(const Perturbation& delta, EntropyMode mode,
                              int bins = 36) {
  const int w = delta.width, h = delta.height;
  std::vector<double> plane(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < delta.channels; ++c) acc += delta.at(y, x, c);
      plane[static_cast<std::size_t>(y) * w + x] = acc / delta.channels;
    }
  const auto f = dft2d(plane, w, h);

  if (mode == EntropyMode::FullSpectrum) {
    std::vector<double> energy;
    energy.reserve(f.size() - 1);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (x == 0 && y == 0) continue;  // DC excluded
        energy.push_back(std::norm(f[static_cast<std::size_t>(y) * w + x]));
      }
    return shannon_entropy_bits(energy);
  }

  std::vector<double> hist(bins, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (x == 0 && y == 0) continue;
      const double e = std::norm(f[static_cast<std::size_t>(y) * w + x]);
      // centered frequency coordinates
      const double fx = (x <= w / 2) ? x : x - w;
      const double fy = (y <= h / 2) ? y : y - h;
      double ang = std::atan2(fy, fx);  // (-pi, pi]
      double t = (ang + std::numbers::pi) / (2.0 * std::numbers::pi);
      int b = static_cast<int>(t * bins);
      if (b >= bins) b = 0;  // wrap the +pi edge onto the -pi bin
      if (b < 0) b = 0;
      hist[b] += e;
    }
  return shannon_entropy_bits(hist);
}

inline double perturbation_magnitude(const Perturbation& d, int y, int x) {
  double m = 0.0;
  for (int c = 0; c < d.channels; ++c) m = std::max(m, std::abs(static_cast<double>(d.at(y, x, c))));
  return m;
}

inline double spatial_coverage(const Perturbation& delta, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("spatial_coverage: threshold must be > 0");
  std::size_t count = 0;
  for (int y = 0; y < delta.height; ++y)
    for (int x = 0; x < delta.width; ++x)
      if (perturbation_magnitude(delta, y, x) > threshold) ++count;
  return 100.0 * static_cast<double>(count) /
         (static_cast<double>(delta.width) * delta.height);
}

namespace detail {

// 8-connected component labeling over a binary mask; labels start at 1,
// 0 means background. Iterative BFS.
inline std::vector<int> label_components(const std::vector<char>& mask, int w, int h,
                                         int* out_n_components = nullptr) {
  std::vector<int> labels(mask.size(), 0);
  int next = 0;
  std::vector<std::size_t> queue;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels[start]) continue;
    ++next;
    labels[start] = next;
    queue.clear();
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t p = queue.back();
      queue.pop_back();
      const int py = static_cast<int>(p) / w;
      const int px = static_cast<int>(p) % w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int ny = py + dy, nx = px + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
          if (mask[q] && !labels[q]) {
            labels[q] = next;
            queue.push_back(q);
          }
        }
    }
  }
  if (out_n_components) *out_n_components = next;
  return labels;
}

inline std::vector<char> magnitude_mask(const Perturbation& d, double threshold) {
  std::vector<char> mask(static_cast<std::size_t>(d.width) * d.height, 0);
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x)
      mask[static_cast<std::size_t>(y) * d.width + x] =
          perturbation_magnitude(d, y, x) > threshold ? 1 : 0;
  return mask;
}

}  // namespace detail

inline double largest_region_ratio(const Perturbation& delta, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("largest_region_ratio: threshold must be > 0");
  const auto mask = detail::magnitude_mask(delta, threshold);
  int n = 0;
  const auto labels = detail::label_components(mask, delta.width, delta.height, &n);
  if (n == 0) return 0.0;
  std::vector<std::size_t> area(n + 1, 0);
  std::size_t total = 0;
  for (int l : labels)
    if (l) {
      ++area[l];
      ++total;
    }
  std::size_t largest = 0;
  for (int l = 1; l <= n; ++l) largest = std::max(largest, area[l]);
  return static_cast<double>(largest) / static_cast<double>(total);
}

// Area-weighted mean eigenvalue ratio of per-component coordinate
// covariance. Components under 5 px are skipped; a degenerate minor axis
// is capped at 1e4. No qualifying components -> 1.
inline double elongation(const Perturbation& delta, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("elongation: threshold must be > 0");
  const auto mask = detail::magnitude_mask(delta, threshold);
  int n = 0;
  const auto labels = detail::label_components(mask, delta.width, delta.height, &n);
  if (n == 0) return 1.0;

  struct Acc {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    std::size_t count = 0;
  };
  std::vector<Acc> acc(n + 1);
  for (int y = 0; y < delta.height; ++y)
    for (int x = 0; x < delta.width; ++x) {
      const int l = labels[static_cast<std::size_t>(y) * delta.width + x];
      if (!l) continue;
      auto& a = acc[l];
      a.sx += x;
      a.sy += y;
      a.sxx += static_cast<double>(x) * x;
      a.syy += static_cast<double>(y) * y;
      a.sxy += static_cast<double>(x) * y;
      ++a.count;
    }

  double weighted = 0.0;
  double weight_total = 0.0;
  for (int l = 1; l <= n; ++l) {
    const auto& a = acc[l];
    if (a.count < 5) continue;
    const double c = static_cast<double>(a.count);
    const double mx = a.sx / c, my = a.sy / c;
    const double cxx = a.sxx / c - mx * mx;
    const double cyy = a.syy / c - my * my;
    const double cxy = a.sxy / c - mx * my;
    const double tr = 0.5 * (cxx + cyy);
    const double det = std::sqrt(std::max(0.0, 0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy));
    const double lmax = tr + det;
    const double lmin = tr - det;
    const double ratio = (lmin < 1e-9) ? 1e4 : lmax / lmin;
    weighted += ratio * c;
    weight_total += c;
  }
  if (weight_total <= 0.0) return 1.0;
  return weighted / weight_total;
}

// --- SSIM -----------------------------------------------------------------

// Single-scale SSIM on the luminance plane: 11x11 Gaussian window with
// sigma 1.5, C1 = (0.01 L)^2, C2 = (0.03 L)^2 at L = 1, valid positions
// only (images must be at least 11x11).
inline double ssim(const Image& x, const Image& y) {
  if (!x.same_shape(y)) throw std::invalid_argument("ssim: shape mismatch");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double C1 = 0.01 * 0.01;
  constexpr double C2 = 0.03 * 0.03;
  if (x.width < kWin || x.height < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  static const std::vector<double> kernel = [] {
    std::vector<double> k(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      const double d = i - (kWin - 1) / 2.0;
      k[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
      sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
  }();

  const int w = x.width, h = x.height;
  std::vector<double> lx(static_cast<std::size_t>(w) * h), ly(lx.size());
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx) {
      lx[static_cast<std::size_t>(yy) * w + xx] = x.luma(yy, xx);
      ly[static_cast<std::size_t>(yy) * w + xx] = y.luma(yy, xx);
    }

  // horizontal pass of the five windowed moments, then vertical
  const int ww = w - kWin + 1;
  const int wh = h - kWin + 1;
  auto hpass = [&](const std::vector<double>& src, std::vector<double>& dst) {
    dst.assign(static_cast<std::size_t>(ww) * h, 0.0);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < ww; ++xx) {
        double acc = 0.0;
        for (int k = 0; k < kWin; ++k) acc += kernel[k] * src[static_cast<std::size_t>(yy) * w + xx + k];
        dst[static_cast<std::size_t>(yy) * ww + xx] = acc;
      }
  };
  auto vpass = [&](const std::vector<double>& src, std::vector<double>& dst) {
    dst.assign(static_cast<std::size_t>(ww) * wh, 0.0);
    for (int yy = 0; yy < wh; ++yy)
      for (int xx = 0; xx < ww; ++xx) {
        double acc = 0.0;
        for (int k = 0; k < kWin; ++k) acc += kernel[k] * src[static_cast<std::size_t>(yy + k) * ww + xx];
        dst[static_cast<std::size_t>(yy) * ww + xx] = acc;
      }
  };

  std::vector<double> xx2(lx.size()), yy2(lx.size()), xy(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    xx2[i] = lx[i] * lx[i];
    yy2[i] = ly[i] * ly[i];
    xy[i] = lx[i] * ly[i];
  }
  std::vector<double> t, mu_x, mu_y, m_xx, m_yy, m_xy;
  hpass(lx, t); vpass(t, mu_x);
  hpass(ly, t); vpass(t, mu_y);
  hpass(xx2, t); vpass(t, m_xx);
  hpass(yy2, t); vpass(t, m_yy);
  hpass(xy, t); vpass(t, m_xy);

  double acc = 0.0;
  const std::size_t cells = static_cast<std::size_t>(ww) * wh;
  for (std::size_t i = 0; i < cells; ++i) {
    const double mx = mu_x[i], my = mu_y[i];
    const double vx = m_xx[i] - mx * mx;
    const double vy = m_yy[i] - my * my;
    const double cxy = m_xy[i] - mx * my;
    const double num = (2.0 * mx * my + C1) * (2.0 * cxy + C2);
    const double den = (mx * mx + my * my + C1) * (vx + vy + C2);
    acc += num / den;
  }
  return acc / static_cast<double>(cells);
}

inline PerturbationStats analyze_pair(const Image& x_adv, const Image& x_clean,
                                      double threshold, int bins,
                                      EntropyMode mode = EntropyMode::FullSpectrum) {
  const Perturbation delta = compute_delta(x_adv, x_clean);
  PerturbationStats st;
  st.fourier_entropy_bits = fourier_entropy(delta, mode, bins);
  st.spatial_coverage_pct = spatial_coverage(delta, threshold);
  st.largest_region_ratio = largest_region_ratio(delta, threshold);
  st.mean_elongation = elongation(delta, threshold);
  st.ssim = ssim(x_adv, x_clean);
  return st;
}

}  // namespace advwt
