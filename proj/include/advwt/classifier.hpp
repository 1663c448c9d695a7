#pragma once

// Trainable softmax classifiers used as attack targets and surrogates.
// Three small architectures (linear, mlp, smallconv) over three feature
// extractors. Training is serial mini-batch Adam, bit-deterministic in the
// seed. The attack side sees only make_score_oracle's probability vectors.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advwt/image.hpp"
#include "advwt/signs.hpp"

namespace advwt {

enum class ArchKind { Linear, Mlp, SmallConv };
enum class FeatureKind { RawPixels, Pooled8, EdgeHist };

struct ModelSpec {
  ArchKind arch = ArchKind::Mlp;
  std::vector<int> hidden = {128};  // mlp only
  int filters = 8;                  // smallconv only
  int kernel = 3;                   // smallconv only
  int input_resolution = 32;
  FeatureKind feature = FeatureKind::RawPixels;
  int num_classes = 2;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 16;
  int epochs = 30;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t seed = 0;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_train_accuracy = -1.0;
  double final_test_accuracy = -1.0;
};

struct ClassifierModel {
  ModelSpec spec;
  std::vector<double> params;
  TrainingMeta meta;
};

// --- features --------------------------------------------------------------

struct Features {
  int h = 1, w = 1, c = 1;
  std::vector<double> v;  // row-major (y, x, c)

  bool spatial() const { return h > 1 || w > 1; }
  int dim() const { return h * w * c; }
};

namespace cls_detail {

inline Features edge_histogram(const Image& img) {
  // 4x4 spatial cells x 8 orientation bins of Sobel gradients
  Features f;
  f.h = 1;
  f.w = 1;
  f.c = 128;
  f.v.assign(128, 0.0);
  const Image g = to_gray(img);
  for (int y = 1; y + 1 < g.height; ++y)
    for (int x = 1; x + 1 < g.width; ++x) {
      const double gx = (g.at(y - 1, x + 1, 0) + 2.0 * g.at(y, x + 1, 0) + g.at(y + 1, x + 1, 0)) -
                        (g.at(y - 1, x - 1, 0) + 2.0 * g.at(y, x - 1, 0) + g.at(y + 1, x - 1, 0));
      const double gy = (g.at(y + 1, x - 1, 0) + 2.0 * g.at(y + 1, x, 0) + g.at(y + 1, x + 1, 0)) -
                        (g.at(y - 1, x - 1, 0) + 2.0 * g.at(y - 1, x, 0) + g.at(y - 1, x + 1, 0));
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag < 1e-9) continue;
      double ang = std::atan2(gy, gx);  // (-pi, pi]
      int bin = static_cast<int>((ang + std::numbers::pi) / (2.0 * std::numbers::pi) * 8.0);
      bin = std::clamp(bin, 0, 7);
      const int cy = std::min(3, y * 4 / g.height);
      const int cx = std::min(3, x * 4 / g.width);
      f.v[(cy * 4 + cx) * 8 + bin] += mag;
    }
  double total = 0.0;
  for (double v : f.v) total += v;
  if (total > 0)
    for (double& v : f.v) v /= total;
  return f;
}

}  // namespace cls_detail

inline Features featurize(const ModelSpec& spec, const Image& img) {
  const Image r = (img.width == spec.input_resolution && img.height == spec.input_resolution)
                      ? img
                      : resize(img, spec.input_resolution, spec.input_resolution);
  switch (spec.feature) {
    case FeatureKind::RawPixels: {
      Features f;
      f.h = r.height;
      f.w = r.width;
      f.c = 3;
      f.v.resize(static_cast<std::size_t>(f.h) * f.w * 3);
      std::size_t i = 0;
      for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x)
          for (int c = 0; c < 3; ++c)
            f.v[i++] = r.channels == 3 ? r.at(y, x, c) : r.at(y, x, 0);
      return f;
    }
    case FeatureKind::Pooled8: {
      Features f;
      f.h = 8;
      f.w = 8;
      f.c = 1;
      f.v.assign(64, 0.0);
      std::vector<int> counts(64, 0);
      for (int y = 0; y < r.height; ++y) {
        const int by = std::min(7, y * 8 / r.height);
        for (int x = 0; x < r.width; ++x) {
          const int bx = std::min(7, x * 8 / r.width);
          f.v[by * 8 + bx] += r.luma(y, x);
          ++counts[by * 8 + bx];
        }
      }
      for (int i = 0; i < 64; ++i)
        if (counts[i]) f.v[i] /= counts[i];
      return f;
    }
    case FeatureKind::EdgeHist:
      return cls_detail::edge_histogram(r);
  }
  throw std::logic_error("featurize: unreachable");
}

// --- parameter layout -------------------------------------------------------

namespace cls_detail {

inline Features probe_features(const ModelSpec& spec) {
  // shapes depend only on the spec, never on image content
  Image probe(spec.input_resolution, spec.input_resolution, 3);
  return featurize(spec, probe);
}

struct ConvDims {
  int ch = 0, cw = 0;  // conv output
  int ph = 0, pw = 0;  // after 2x2 avg pool, stride 2
};

inline ConvDims conv_dims(const ModelSpec& spec, const Features& f) {
  ConvDims d;
  d.ch = f.h - spec.kernel + 1;
  d.cw = f.w - spec.kernel + 1;
  d.ph = d.ch / 2;
  d.pw = d.cw / 2;
  return d;
}

inline void check_spec(const ModelSpec& spec) {
  if (spec.num_classes < 2) throw ConfigError("ModelSpec: num_classes < 2");
  if (spec.input_resolution < 8) throw ConfigError("ModelSpec: input_resolution < 8");
  if (spec.arch == ArchKind::Mlp)
    for (int wdt : spec.hidden)
      if (wdt <= 0) throw ConfigError("ModelSpec: non-positive hidden width");
  if (spec.arch == ArchKind::SmallConv) {
    if (spec.filters <= 0 || spec.kernel <= 0)
      throw ConfigError("ModelSpec: non-positive filters/kernel");
    if (spec.feature == FeatureKind::EdgeHist)
      throw ConfigError("ModelSpec: smallconv needs a spatial feature (raw_pixels or pooled8)");
    const Features f = probe_features(spec);
    const ConvDims d = conv_dims(spec, f);
    if (d.ch < 2 || d.cw < 2)
      throw ConfigError("ModelSpec: kernel larger than feature grid");
  }
}

}  // namespace cls_detail

inline std::size_t param_count(const ModelSpec& spec) {
  cls_detail::check_spec(spec);
  const Features f = cls_detail::probe_features(spec);
  const int d = f.dim();
  const int q = spec.num_classes;
  switch (spec.arch) {
    case ArchKind::Linear:
      return static_cast<std::size_t>(q) * d + q;
    case ArchKind::Mlp: {
      std::size_t total = 0;
      int in = d;
      for (int hsz : spec.hidden) {
        total += static_cast<std::size_t>(hsz) * in + hsz;
        in = hsz;
      }
      total += static_cast<std::size_t>(q) * in + q;
      return total;
    }
    case ArchKind::SmallConv: {
      const auto dims = cls_detail::conv_dims(spec, f);
      const std::size_t conv = static_cast<std::size_t>(spec.filters) * spec.kernel * spec.kernel * f.c + spec.filters;
      const std::size_t fc_in = static_cast<std::size_t>(spec.filters) * dims.ph * dims.pw;
      return conv + static_cast<std::size_t>(q) * fc_in + q;
    }
  }
  throw std::logic_error("param_count: unreachable");
}

// --- softmax / predict ------------------------------------------------------

inline std::vector<double> softmax(const std::vector<double>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logit vector");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

namespace cls_detail {

// Forward pass; when `acts` is non-null the intermediate activations are
// captured for the backward pass.
struct Activations {
  std::vector<std::vector<double>> layer_in;  // mlp inputs per affine layer
  std::vector<double> conv_pre;               // pre-ReLU conv map
  std::vector<double> pooled;                 // pooled conv output
};

inline std::vector<double> forward_logits(const ModelSpec& spec,
                                          const std::vector<double>& params,
                                          const Features& f,
                                          Activations* acts = nullptr) {
  const int q = spec.num_classes;
  switch (spec.arch) {
    case ArchKind::Linear: {
      const int d = f.dim();
      std::vector<double> logits(q);
      for (int o = 0; o < q; ++o) {
        const double* wr = &params[static_cast<std::size_t>(o) * d];
        double acc = params[static_cast<std::size_t>(q) * d + o];
        for (int i = 0; i < d; ++i) acc += wr[i] * f.v[i];
        logits[o] = acc;
      }
      if (acts) acts->layer_in = {f.v};
      return logits;
    }
    case ArchKind::Mlp: {
      std::vector<int> dims;
      dims.push_back(f.dim());
      for (int hsz : spec.hidden) dims.push_back(hsz);
      dims.push_back(q);
      std::vector<double> cur = f.v;
      std::size_t off = 0;
      if (acts) acts->layer_in.clear();
      for (std::size_t layer = 0; layer + 1 < dims.size(); ++layer) {
        const int in = dims[layer], out = dims[layer + 1];
        if (acts) acts->layer_in.push_back(cur);
        std::vector<double> nxt(out);
        for (int o = 0; o < out; ++o) {
          const double* wr = &params[off + static_cast<std::size_t>(o) * in];
          double acc = params[off + static_cast<std::size_t>(out) * in + o];
          for (int i = 0; i < in; ++i) acc += wr[i] * cur[i];
          nxt[o] = acc;
        }
        off += static_cast<std::size_t>(out) * in + out;
        const bool last = (layer + 2 == dims.size());
        if (!last)
          for (double& v : nxt) v = std::max(0.0, v);
        cur = std::move(nxt);
      }
      return cur;
    }
    case ArchKind::SmallConv: {
      const auto dims = conv_dims(spec, f);
      const int F = spec.filters, K = spec.kernel, C = f.c;
      const std::size_t conv_w = static_cast<std::size_t>(F) * K * K * C;
      std::vector<double> pre(static_cast<std::size_t>(F) * dims.ch * dims.cw);
      for (int o = 0; o < F; ++o) {
        const double* kw = &params[static_cast<std::size_t>(o) * K * K * C];
        const double kb = params[conv_w + o];
        for (int y = 0; y < dims.ch; ++y)
          for (int x = 0; x < dims.cw; ++x) {
            double acc = kb;
            for (int ky = 0; ky < K; ++ky)
              for (int kx = 0; kx < K; ++kx)
                for (int c = 0; c < C; ++c)
                  acc += kw[(ky * K + kx) * C + c] *
                         f.v[(static_cast<std::size_t>(y + ky) * f.w + (x + kx)) * C + c];
            pre[(static_cast<std::size_t>(o) * dims.ch + y) * dims.cw + x] = acc;
          }
      }
      if (acts) acts->conv_pre = pre;
      std::vector<double> pooled(static_cast<std::size_t>(F) * dims.ph * dims.pw, 0.0);
      for (int o = 0; o < F; ++o)
        for (int y = 0; y < dims.ph; ++y)
          for (int x = 0; x < dims.pw; ++x) {
            double acc = 0.0;
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const double v = pre[(static_cast<std::size_t>(o) * dims.ch + 2 * y + dy) * dims.cw + 2 * x + dx];
                acc += std::max(0.0, v);
              }
            pooled[(static_cast<std::size_t>(o) * dims.ph + y) * dims.pw + x] = acc / 4.0;
          }
      if (acts) acts->pooled = pooled;
      const std::size_t fc_in = pooled.size();
      const std::size_t fc_off = conv_w + F;
      std::vector<double> logits(q);
      for (int o = 0; o < q; ++o) {
        const double* wr = &params[fc_off + static_cast<std::size_t>(o) * fc_in];
        double acc = params[fc_off + static_cast<std::size_t>(q) * fc_in + o];
        for (std::size_t i = 0; i < fc_in; ++i) acc += wr[i] * pooled[i];
        logits[o] = acc;
      }
      return logits;
    }
  }
  throw std::logic_error("forward_logits: unreachable");
}

// Cross-entropy loss and full parameter gradient for one example; the
// gradient is accumulated into grad (same length as params).
inline double ce_backward(const ModelSpec& spec, const std::vector<double>& params,
                          const Features& f, int label, std::vector<double>& grad) {
  Activations acts;
  const std::vector<double> logits = forward_logits(spec, params, f, &acts);
  const std::vector<double> p = softmax(logits);
  const double loss = -std::log(std::max(p[label], 1e-300));
  std::vector<double> dlogits = p;
  dlogits[label] -= 1.0;

  const int q = spec.num_classes;
  switch (spec.arch) {
    case ArchKind::Linear: {
      const int d = f.dim();
      for (int o = 0; o < q; ++o) {
        double* gw = &grad[static_cast<std::size_t>(o) * d];
        for (int i = 0; i < d; ++i) gw[i] += dlogits[o] * f.v[i];
        grad[static_cast<std::size_t>(q) * d + o] += dlogits[o];
      }
      return loss;
    }
    case ArchKind::Mlp: {
      std::vector<int> dims;
      dims.push_back(f.dim());
      for (int hsz : spec.hidden) dims.push_back(hsz);
      dims.push_back(q);
      // offsets per layer
      std::vector<std::size_t> offs(dims.size() - 1);
      std::size_t off = 0;
      for (std::size_t layer = 0; layer + 1 < dims.size(); ++layer) {
        offs[layer] = off;
        off += static_cast<std::size_t>(dims[layer + 1]) * dims[layer] + dims[layer + 1];
      }
      std::vector<double> delta = dlogits;
      for (int layer = static_cast<int>(dims.size()) - 2; layer >= 0; --layer) {
        const int in = dims[layer], out = dims[layer + 1];
        const std::vector<double>& input = acts.layer_in[layer];
        const std::size_t o0 = offs[layer];
        // accumulate weight/bias grads
        for (int o = 0; o < out; ++o) {
          double* gw = &grad[o0 + static_cast<std::size_t>(o) * in];
          for (int i = 0; i < in; ++i) gw[i] += delta[o] * input[i];
          grad[o0 + static_cast<std::size_t>(out) * in + o] += delta[o];
        }
        if (layer == 0) break;
        // propagate through weights and the ReLU of the previous layer
        std::vector<double> prev(in, 0.0);
        for (int o = 0; o < out; ++o) {
          const double* wr = &params[o0 + static_cast<std::size_t>(o) * in];
          for (int i = 0; i < in; ++i) prev[i] += wr[i] * delta[o];
        }
        for (int i = 0; i < in; ++i)
          if (input[i] <= 0.0) prev[i] = 0.0;  // ReLU output was clamped
        delta = std::move(prev);
      }
      return loss;
    }
    case ArchKind::SmallConv: {
      const auto dims = conv_dims(spec, f);
      const int F = spec.filters, K = spec.kernel, C = f.c;
      const std::size_t conv_w = static_cast<std::size_t>(F) * K * K * C;
      const std::size_t fc_in = acts.pooled.size();
      const std::size_t fc_off = conv_w + F;
      // fc grads and pooled delta
      std::vector<double> dpooled(fc_in, 0.0);
      for (int o = 0; o < q; ++o) {
        double* gw = &grad[fc_off + static_cast<std::size_t>(o) * fc_in];
        const double* wr = &params[fc_off + static_cast<std::size_t>(o) * fc_in];
        for (std::size_t i = 0; i < fc_in; ++i) {
          gw[i] += dlogits[o] * acts.pooled[i];
          dpooled[i] += dlogits[o] * wr[i];
        }
        grad[fc_off + static_cast<std::size_t>(q) * fc_in + o] += dlogits[o];
      }
      // pool + relu backward into conv pre-activation delta
      std::vector<double> dpre(acts.conv_pre.size(), 0.0);
      for (int o = 0; o < F; ++o)
        for (int y = 0; y < dims.ph; ++y)
          for (int x = 0; x < dims.pw; ++x) {
            const double dp = dpooled[(static_cast<std::size_t>(o) * dims.ph + y) * dims.pw + x] / 4.0;
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const std::size_t idx = (static_cast<std::size_t>(o) * dims.ch + 2 * y + dy) * dims.cw + 2 * x + dx;
                if (acts.conv_pre[idx] > 0.0) dpre[idx] += dp;
              }
          }
      // conv grads
      for (int o = 0; o < F; ++o) {
        double* gw = &grad[static_cast<std::size_t>(o) * K * K * C];
        double gb = 0.0;
        for (int y = 0; y < dims.ch; ++y)
          for (int x = 0; x < dims.cw; ++x) {
            const double d = dpre[(static_cast<std::size_t>(o) * dims.ch + y) * dims.cw + x];
            if (d == 0.0) continue;
            gb += d;
            for (int ky = 0; ky < K; ++ky)
              for (int kx = 0; kx < K; ++kx)
                for (int c = 0; c < C; ++c)
                  gw[(ky * K + kx) * C + c] +=
                      d * f.v[(static_cast<std::size_t>(y + ky) * f.w + (x + kx)) * C + c];
          }
        grad[conv_w + o] += gb;
      }
      return loss;
    }
  }
  throw std::logic_error("ce_backward: unreachable");
}

inline std::vector<double> init_params(const ModelSpec& spec, std::uint64_t seed) {
  const std::size_t n = param_count(spec);
  std::vector<double> p(n, 0.0);
  rng::Rng r(rng::hash_combine(seed, 0x1417ull));
  const Features f = probe_features(spec);
  auto he = [&](double* w, std::size_t count, int fan_in) {
    const double s = std::sqrt(2.0 / fan_in);
    for (std::size_t i = 0; i < count; ++i) w[i] = r.normal() * s;
  };
  switch (spec.arch) {
    case ArchKind::Linear:
      break;  // zero init: multinomial logistic regression is convex
    case ArchKind::Mlp: {
      std::size_t off = 0;
      int in = f.dim();
      for (int hsz : spec.hidden) {
        he(&p[off], static_cast<std::size_t>(hsz) * in, in);
        off += static_cast<std::size_t>(hsz) * in + hsz;
        in = hsz;
      }
      he(&p[off], static_cast<std::size_t>(spec.num_classes) * in, in);
      break;
    }
    case ArchKind::SmallConv: {
      const auto dims = conv_dims(spec, f);
      const std::size_t conv_w = static_cast<std::size_t>(spec.filters) * spec.kernel * spec.kernel * f.c;
      he(p.data(), conv_w, spec.kernel * spec.kernel * f.c);
      const std::size_t fc_in = static_cast<std::size_t>(spec.filters) * dims.ph * dims.pw;
      he(&p[conv_w + spec.filters], static_cast<std::size_t>(spec.num_classes) * fc_in,
         static_cast<int>(fc_in));
      break;
    }
  }
  return p;
}

}  // namespace cls_detail

struct Prediction {
  int label = 0;
  double confidence = 0.0;
  std::vector<double> scores;
};

inline Prediction predict(const ClassifierModel& model, const Image& x) {
  const Features f = featurize(model.spec, x);
  const auto logits = cls_detail::forward_logits(model.spec, model.params, f);
  Prediction pr;
  pr.scores = softmax(logits);
  pr.label = 0;
  for (std::size_t i = 1; i < pr.scores.size(); ++i)
    if (pr.scores[i] > pr.scores[pr.label]) pr.label = static_cast<int>(i);  // ties keep lowest
  pr.confidence = pr.scores[pr.label];
  return pr;
}

// Optional training-time augmentation. fn is applied to an item with
// probability prob, decided by a per-(epoch, item) coin that is independent
// of every other random stream; on_epoch fires before each epoch with a
// frozen snapshot of the current parameters.
struct Augment {
  double prob = 0.0;
  std::function<Image(const Image&, std::size_t item_index, std::uint64_t seed)> fn;
  std::function<void(int epoch, const ClassifierModel& snapshot)> on_epoch;
};

inline bool augment_coin(std::uint64_t train_seed, int epoch, std::size_t item, double prob) {
  return rng::unit_from_hash(rng::hash4(train_seed, 0xA9u, static_cast<std::uint64_t>(epoch), item)) < prob;
}

inline std::uint64_t augment_item_seed(std::uint64_t train_seed, int epoch, std::size_t item) {
  return rng::hash4(train_seed, 0xA95Eu, static_cast<std::uint64_t>(epoch), item);
}

inline double evaluate(const ClassifierModel& model, const LabeledDataset& ds);

inline ClassifierModel train(const LabeledDataset& dataset, const ModelSpec& spec,
                             const TrainConfig& cfg, const Augment* augment = nullptr) {
  cls_detail::check_spec(spec);
  if (dataset.items.empty()) throw std::invalid_argument("train: empty dataset");
  for (const auto& it : dataset.items)
    if (it.label < 0 || it.label >= spec.num_classes)
      throw std::invalid_argument("train: label out of range");
  if (cfg.batch_size < 1 || cfg.learning_rate <= 0)
    throw std::invalid_argument("train: bad config");

  ClassifierModel model;
  model.spec = spec;
  model.params = cls_detail::init_params(spec, cfg.seed);
  model.meta.seed = cfg.seed;
  model.meta.epochs = cfg.epochs;

  const std::size_t n_items = dataset.items.size();
  std::vector<Features> cache(n_items);
  for (std::size_t i = 0; i < n_items; ++i) cache[i] = featurize(spec, dataset.items[i].image);

  const std::size_t np = model.params.size();
  std::vector<double> m(np, 0.0), v(np, 0.0), grad(np, 0.0);
  long step = 0;

  std::vector<std::size_t> order(n_items);
  for (std::size_t i = 0; i < n_items; ++i) order[i] = i;
  const bool use_aug = augment && augment->prob > 0.0 && augment->fn;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (use_aug && augment->on_epoch) augment->on_epoch(epoch, model);

    // Fisher-Yates with the per-epoch shuffle stream
    rng::Rng shuffle_rng(rng::hash3(cfg.seed, 0x5Fu, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n_items - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.next_below(i + 1);
      std::swap(order[i], order[j]);
    }

    for (std::size_t start = 0; start < n_items; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_items, start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t idx = order[bi];
        const auto& item = dataset.items[idx];
        if (use_aug && augment_coin(cfg.seed, epoch, idx, augment->prob)) {
          const Image aug_img = augment->fn(item.image, idx, augment_item_seed(cfg.seed, epoch, idx));
          batch_loss += cls_detail::ce_backward(spec, model.params, featurize(spec, aug_img),
                                                item.label, grad);
        } else {
          batch_loss += cls_detail::ce_backward(spec, model.params, cache[idx], item.label, grad);
        }
      }
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      if (!std::isfinite(batch_loss)) throw std::runtime_error("train: loss diverged to non-finite");
      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < np; ++i) {
        const double g = grad[i] * inv_batch;
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double mh = m[i] / bc1;
        const double vh = v[i] / bc2;
        model.params[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.eps);
      }
    }
  }

  model.meta.final_train_accuracy = evaluate(model, dataset);
  return model;
}

inline double evaluate(const ClassifierModel& model, const LabeledDataset& ds) {
  if (ds.items.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : ds.items) {
    if (item.label < 0 || item.label >= model.spec.num_classes)
      throw std::invalid_argument("evaluate: label out of range");
    if (predict(model, item.image).label == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.items.size());
}

// --- serialization ----------------------------------------------------------
// "AWTM1" magic, little-endian descriptor, f64 parameter array.

namespace cls_detail {

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(const std::vector<unsigned char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw IoError("model file truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace cls_detail

inline void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  using cls_detail::put_le;
  std::vector<unsigned char> out;
  const char magic[5] = {'A', 'W', 'T', 'M', '1'};
  out.insert(out.end(), magic, magic + 5);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.arch));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.feature));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.input_resolution));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.num_classes));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.filters));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.kernel));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.spec.hidden.size()));
  for (int hsz : model.spec.hidden) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(hsz));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.params.size()));
  for (double p : model.params) {
    std::uint64_t bits;
    std::memcpy(&bits, &p, 8);
    put_le<std::uint64_t>(out, bits);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("save_model: cannot open " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("save_model: write failed " + path.string());
}

inline ClassifierModel load_model(const std::filesystem::path& path) {
  using cls_detail::get_le;
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("load_model: cannot open " + path.string());
  std::vector<unsigned char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 5 || std::memcmp(in.data(), "AWTM1", 5) != 0)
    throw IoError("load_model: bad magic in " + path.string());
  std::size_t pos = 5;
  ClassifierModel model;
  model.spec.arch = static_cast<ArchKind>(get_le<std::uint32_t>(in, pos));
  model.spec.feature = static_cast<FeatureKind>(get_le<std::uint32_t>(in, pos));
  model.spec.input_resolution = static_cast<int>(get_le<std::uint32_t>(in, pos));
  model.spec.num_classes = static_cast<int>(get_le<std::uint32_t>(in, pos));
  model.spec.filters = static_cast<int>(get_le<std::uint32_t>(in, pos));
  model.spec.kernel = static_cast<int>(get_le<std::uint32_t>(in, pos));
  const auto n_hidden = get_le<std::uint32_t>(in, pos);
  model.spec.hidden.clear();
  for (std::uint32_t i = 0; i < n_hidden; ++i)
    model.spec.hidden.push_back(static_cast<int>(get_le<std::uint32_t>(in, pos)));
  const auto np = get_le<std::uint64_t>(in, pos);
  if (np != param_count(model.spec))
    throw IoError("load_model: parameter count does not match descriptor in " + path.string());
  model.params.resize(np);
  for (std::uint64_t i = 0; i < np; ++i) {
    const std::uint64_t bits = get_le<std::uint64_t>(in, pos);
    std::memcpy(&model.params[i], &bits, 8);
  }
  return model;
}

// The only surface the attack engine may touch: softmax score vectors.
using ScoreOracle = std::function<std::vector<double>(const Image&)>;

inline ScoreOracle make_score_oracle(const ClassifierModel& model) {
  return [model](const Image& x) { return predict(model, x).scores; };
}

}  // namespace advwt
