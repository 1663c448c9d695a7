#pragma once

// Standalone translation-training objectives over caller-supplied values
// and function handles. No training loop lives here; these are verified
// math, usable for analysis and the selftest table.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "advwt/damage.hpp"
#include "advwt/image.hpp"

namespace advwt {

struct LossWeights {
  // order: sty, ds, cyc, adv, tri, kl, cont
  std::array<double, 7> lambda = {2, 1, 1, 1, 1, 1, 1};
};

struct GaussianStats {
  std::vector<double> mean;
  std::vector<double> variance;  // diagonal, entries > 0
};

inline double style_reconstruction_loss(const StyleCode& s, const StyleCode& s_hat) {
  if (s.dim() != s_hat.dim())
    throw std::invalid_argument("style_reconstruction_loss: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.dim(); ++i) acc += std::abs(s.values[i] - s_hat.values[i]);
  return acc / static_cast<double>(s.dim());
}

inline double mean_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("image shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    acc += std::abs(static_cast<double>(a.data[i]) - b.data[i]);
  return acc / static_cast<double>(a.data.size());
}

// Negative mean absolute difference: minimizing it pushes outputs apart.
inline double diversity_loss(const Image& img1, const Image& img2) {
  return -mean_abs_diff(img1, img2);
}

inline double cycle_loss(const Image& x, const Image& x_reconstructed) {
  return mean_abs_diff(x, x_reconstructed);
}

inline double adversarial_loss(double d_real, double d_fake) {
  constexpr double eps = 1e-7;
  d_real = std::clamp(d_real, eps, 1.0 - eps);
  d_fake = std::clamp(d_fake, eps, 1.0 - eps);
  return std::log(d_real) + std::log(1.0 - d_fake);
}

inline double l2_dist(const StyleCode& a, const StyleCode& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline double triplet_loss(const StyleCode& anchor, const StyleCode& positive,
                           const StyleCode& negative, double beta) {
  if (anchor.dim() != positive.dim() || anchor.dim() != negative.dim())
    throw std::invalid_argument("triplet_loss: dimension mismatch");
  if (beta < 0) throw std::invalid_argument("triplet_loss: negative margin");
  return std::max(l2_dist(anchor, positive) - l2_dist(anchor, negative) + beta, 0.0);
}

// Closed-form KL(N(mean, diag(var)) || N(0, I)).
inline double kl_loss(const GaussianStats& stats) {
  if (stats.mean.size() != stats.variance.size())
    throw std::invalid_argument("kl_loss: mean/variance size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < stats.mean.size(); ++i) {
    const double v = stats.variance[i];
    if (!(v > 0)) throw std::invalid_argument("kl_loss: non-positive variance");
    acc += v + stats.mean[i] * stats.mean[i] - 1.0 - std::log(v);
  }
  return 0.5 * acc;
}

// Diagonal Gaussian fit (sample mean, population variance) over style codes.
inline GaussianStats fit_diagonal_gaussian(const std::vector<StyleCode>& codes) {
  if (codes.empty()) throw std::invalid_argument("fit_diagonal_gaussian: empty sample");
  const std::size_t n = codes[0].dim();
  GaussianStats st;
  st.mean.assign(n, 0.0);
  st.variance.assign(n, 0.0);
  for (const auto& c : codes)
    for (std::size_t i = 0; i < n; ++i) st.mean[i] += c.values[i];
  for (double& m : st.mean) m /= static_cast<double>(codes.size());
  for (const auto& c : codes)
    for (std::size_t i = 0; i < n; ++i) {
      const double d = c.values[i] - st.mean[i];
      st.variance[i] += d * d;
    }
  for (double& v : st.variance) {
    v /= static_cast<double>(codes.size());
    v = std::max(v, 1e-12);
  }
  return st;
}

using FeatureFn = std::function<std::vector<double>(const Image&)>;

// 8x8 grayscale average pool, the default psi.
inline std::vector<double> pooled_features_8x8(const Image& img) {
  std::vector<double> out(64, 0.0);
  std::vector<int> counts(64, 0);
  for (int y = 0; y < img.height; ++y) {
    const int by = std::min(7, y * 8 / img.height);
    for (int x = 0; x < img.width; ++x) {
      const int bx = std::min(7, x * 8 / img.width);
      out[by * 8 + bx] += img.luma(y, x);
      ++counts[by * 8 + bx];
    }
  }
  for (int i = 0; i < 64; ++i)
    if (counts[i]) out[i] /= counts[i];
  return out;
}

inline double content_loss(const Image& x, const Image& g, const FeatureFn& feature_fn = {}) {
  if (!x.same_shape(g)) throw std::invalid_argument("content_loss: shape mismatch");
  const FeatureFn& fn = feature_fn ? feature_fn : FeatureFn(pooled_features_8x8);
  const auto fx = fn(x);
  const auto fg = fn(g);
  if (fx.size() != fg.size() || fx.empty())
    throw std::logic_error("content_loss: feature_fn returned mismatched dimensions");
  double acc = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) acc += std::abs(fx[i] - fg[i]);
  return acc / static_cast<double>(fx.size());
}

// Weighted sum in the fixed order (sty, ds, cyc, adv, tri, kl, cont).
inline double total_objective(const std::array<double, 7>& losses,
                              const LossWeights& weights = {}) {
  double acc = 0.0;
  for (int i = 0; i < 7; ++i) acc += weights.lambda[i] * losses[i];
  return acc;
}

}  // namespace advwt
