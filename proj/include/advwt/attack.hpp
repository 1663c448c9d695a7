#pragma once

// Score-based gray-box search for an adversarial damage style code, plus
// the dataset-level driver and the strength sweep. The engine consumes
// nothing but softmax score vectors: no parameters, no gradients.
//
// Search loop: start from s = M(z); at each strength step alpha (c_min up
// to c_max over K steps) sample T candidate codes uniformly inside
// [s - alpha|s|, s + alpha|s|], score the generated images, return the
// first candidate whose argmax leaves the reference label, otherwise carry
// the lowest-confidence candidate into the next step.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "advwt/analysis.hpp"
#include "advwt/classifier.hpp"
#include "advwt/damage.hpp"
#include "advwt/image.hpp"
#include "advwt/parallel.hpp"
#include "advwt/signs.hpp"

namespace advwt {

enum class CompareMode { VsInitialPrediction, VsGroundTruth };

struct AttackConfig {
  double c_min = 0.1;
  double c_max = 1.5;
  int steps_K = 15;
  int samples_T = 30;
  CompareMode compare_mode = CompareMode::VsInitialPrediction;
  std::uint64_t rng_seed = 1;
  std::uint64_t texture_seed = 2;
  std::uint64_t mapper_seed = 3;
  int style_dim = kDefaultStyleDim;
  int noise_dim = kDefaultNoiseDim;

  // Test hooks / sweep plumbing, not part of the serialized config surface:
  std::optional<StyleCode> forced_initial_style;
  std::vector<double> alpha_grid_override;  // when set, replaces the derived grid

  void validate() const {
    if (!(c_min > 0) || !(c_min <= c_max))
      throw ConfigError("AttackConfig: need 0 < c_min <= c_max");
    if (steps_K < 1 || samples_T < 1)
      throw ConfigError("AttackConfig: steps_K and samples_T must be >= 1");
    if (style_dim < 16 || noise_dim < 1) throw ConfigError("AttackConfig: bad dimensions");
  }

  std::vector<double> alpha_grid() const {
    if (!alpha_grid_override.empty()) return alpha_grid_override;
    std::vector<double> grid;
    grid.reserve(steps_K);
    if (steps_K == 1) {
      grid.push_back(c_min);
    } else {
      const double eta = (c_max - c_min) / (steps_K - 1);
      for (int i = 0; i < steps_K; ++i) grid.push_back(c_min + eta * i);
    }
    return grid;
  }
};

struct AttackResult {
  bool success = false;
  bool pre_misclassified = false;
  StyleCode s_adv;  // best-effort s_best when success is false
  double alpha_used = 0.0;
  long queries = 0;
  std::vector<std::pair<double, double>> confidence_trajectory;  // (alpha, best conf)
  Image adversarial_image;
  int original_label = -1;  // the reference label the search compared against
  int adversarial_label = -1;
  double wall_time_ms = 0.0;
};

using DamageGenerator = std::function<Image(const Image&, const StyleCode&, std::uint64_t)>;

// Test instrumentation: observes every sampled candidate with the bounds
// that produced it.
struct AttackObserver {
  std::function<void(int step, double alpha, const StyleCode& center,
                     const std::vector<double>& half_width, const StyleCode& candidate)>
      on_candidate;
};

namespace attack_detail {

inline int argmax_lowest(const std::vector<double>& scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = static_cast<int>(i);
  return best;
}

inline void check_scores(const std::vector<double>& scores) {
  if (scores.size() < 2) throw std::runtime_error("score oracle returned fewer than 2 classes");
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s) || s < -1e-9 || s > 1.0 + 1e-9)
      throw std::runtime_error("score oracle returned out-of-range or NaN scores");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::runtime_error("score oracle returned a non-normalized distribution");
}

}  // namespace attack_detail

inline AttackResult find_adversarial_style(const Image& x, const ScoreOracle& oracle,
                                           const AttackConfig& cfg,
                                           std::optional<int> y = std::nullopt,
                                           const DamageGenerator& generator_in = {},
                                           const AttackObserver* observer = nullptr) {
  cfg.validate();
  if (cfg.compare_mode == CompareMode::VsGroundTruth && !y)
    throw ConfigError("find_adversarial_style: vs_ground_truth needs a label");

  const DamageGenerator& generator =
      generator_in ? generator_in
                   : DamageGenerator([](const Image& img, const StyleCode& s, std::uint64_t seed) {
                       return generate_damaged(img, s, seed);
                     });

  const auto t0 = std::chrono::steady_clock::now();
  AttackResult res;

  auto query = [&](const Image& img) {
    std::vector<double> s = oracle(img);
    attack_detail::check_scores(s);
    ++res.queries;
    return s;
  };

  // Stage I: initial style code from the mapper (or the test hook)
  StyleCode s_theta;
  if (cfg.forced_initial_style) {
    s_theta = *cfg.forced_initial_style;
  } else {
    rng::Rng z_rng(rng::hash_combine(cfg.rng_seed, 0));
    NoiseVector z;
    z.values.resize(cfg.noise_dim);
    for (double& v : z.values) v = z_rng.normal();
    s_theta = StyleMapper::seeded(cfg.mapper_seed, cfg.style_dim, cfg.noise_dim).map(z);
  }

  // Stage II: score the initially damaged image
  Image x_d = generator(x, s_theta, cfg.texture_seed);
  std::vector<double> scores0 = query(x_d);
  const int y_hat = attack_detail::argmax_lowest(scores0);
  const int reference =
      cfg.compare_mode == CompareMode::VsGroundTruth ? *y : y_hat;
  if (reference < 0 || reference >= static_cast<int>(scores0.size()))
    throw ConfigError("find_adversarial_style: label out of score range");
  res.original_label = reference;

  if (y && y_hat != *y) {
    // damage alone already flips the prediction
    res.success = true;
    res.pre_misclassified = true;
    res.s_adv = s_theta;
    res.alpha_used = 0.0;
    res.adversarial_image = std::move(x_d);
    res.adversarial_label = y_hat;
    res.confidence_trajectory.emplace_back(0.0, scores0[reference]);
    res.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0).count();
    return res;
  }

  double conf = scores0[reference];
  res.confidence_trajectory.emplace_back(0.0, conf);
  StyleCode s_best = s_theta;
  Image best_image = x_d;
  int best_label = y_hat;

  // Stages III-IV: escalate alpha, Monte-Carlo sample within the bounds
  const std::vector<double> grid = cfg.alpha_grid();
  std::vector<double> half_width(s_theta.dim());
  for (std::size_t step = 0; step < grid.size(); ++step) {
    const double alpha = grid[step];
    for (std::size_t i = 0; i < s_theta.dim(); ++i) {
      double mag = std::abs(s_theta.values[i]);
      if (mag < 1e-4) mag += 1e-4;  // keep zero entries searchable
      half_width[i] = alpha * mag;
    }
    // candidate stream keyed by (seed, step) so a sweep capped at a smaller
    // alpha is bit-exactly a prefix of a larger-cap run
    rng::Rng step_rng(rng::hash3(cfg.rng_seed, 0xA1FAu, static_cast<std::uint64_t>(step)));
    for (int t = 0; t < cfg.samples_T; ++t) {
      StyleCode cand(s_theta.dim());
      for (std::size_t i = 0; i < s_theta.dim(); ++i)
        cand.values[i] = s_theta.values[i] + half_width[i] * (2.0 * step_rng.next_double() - 1.0);
      if (observer && observer->on_candidate)
        observer->on_candidate(static_cast<int>(step), alpha, s_theta, half_width, cand);

      Image img = generator(x, cand, cfg.texture_seed);
      std::vector<double> scores = query(img);
      const int label = attack_detail::argmax_lowest(scores);
      if (label != reference) {
        res.success = true;
        res.s_adv = std::move(cand);
        res.alpha_used = alpha;
        res.adversarial_image = std::move(img);
        res.adversarial_label = label;
        res.confidence_trajectory.emplace_back(alpha, scores[reference]);
        res.wall_time_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0).count();
        return res;
      }
      if (scores[reference] < conf) {
        conf = scores[reference];
        s_best = cand;
        best_image = std::move(img);
        best_label = label;
      }
    }
    res.confidence_trajectory.emplace_back(alpha, conf);
    s_theta = s_best;  // refine around the most adversarial-looking code
  }

  res.success = false;
  res.s_adv = std::move(s_best);
  res.alpha_used = grid.back();
  res.adversarial_image = std::move(best_image);
  res.adversarial_label = best_label;
  res.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0).count();
  return res;
}

// --- dataset-level drivers --------------------------------------------------

struct ItemAttackRecord {
  std::size_t index = 0;
  int label = -1;            // ground truth
  int clean_prediction = -1;
  bool clean_correct = false;
  bool attacked = false;
  AttackResult result;  // valid when attacked
};

struct DatasetAttackOutcome {
  std::size_t total = 0;
  std::size_t attempted = 0;
  std::size_t successes = 0;
  std::size_t clean_errors = 0;
  double asr = 0.0;           // successes / attempted
  double benign_error = 0.0;  // clean_errors / total
  std::vector<ItemAttackRecord> items;
};

// Items the model already misclassifies clean are excluded from the ASR
// denominator and reported as benign error, per the usual protocol.
inline DatasetAttackOutcome attack_dataset(const LabeledDataset& dataset,
                                           const ScoreOracle& oracle,
                                           const AttackConfig& cfg, int jobs = 1,
                                           const DamageGenerator& generator = {}) {
  cfg.validate();
  if (dataset.items.empty()) throw ConfigError("attack_dataset: empty dataset");

  DatasetAttackOutcome out;
  out.total = dataset.items.size();
  out.items.resize(out.total);

  parallel_for(out.total, jobs, [&](std::size_t i) {
    const auto& item = dataset.items[i];
    ItemAttackRecord rec;
    rec.index = i;
    rec.label = item.label;
    std::vector<double> clean_scores = oracle(item.image);
    attack_detail::check_scores(clean_scores);
    rec.clean_prediction = attack_detail::argmax_lowest(clean_scores);
    rec.clean_correct = rec.clean_prediction == item.label;
    if (rec.clean_correct) {
      AttackConfig item_cfg = cfg;
      item_cfg.rng_seed = rng::hash_combine(cfg.rng_seed, i);
      item_cfg.texture_seed = rng::hash_combine(cfg.texture_seed, i);
      rec.attacked = true;
      rec.result = find_adversarial_style(item.image, oracle, item_cfg, item.label, generator);
    }
    out.items[i] = std::move(rec);
  });

  for (const auto& rec : out.items) {
    if (!rec.clean_correct) {
      ++out.clean_errors;
    } else {
      ++out.attempted;
      if (rec.result.success) ++out.successes;
    }
  }
  out.asr = out.attempted ? static_cast<double>(out.successes) / out.attempted : 0.0;
  out.benign_error = static_cast<double>(out.clean_errors) / out.total;
  return out;
}

struct AlphaSweepPoint {
  double alpha = 0.0;
  double asr = 0.0;
  double mean_ssim = 1.0;
};

// Runs the full attack with the strength cap lowered to each requested
// alpha. Per-item seeds are shared across caps and candidate streams are
// keyed by step index, so a smaller cap is a strict prefix of a larger one.
inline std::vector<AlphaSweepPoint> alpha_sweep(const LabeledDataset& dataset,
                                                const ScoreOracle& oracle,
                                                const AttackConfig& cfg,
                                                const std::vector<double>& alphas,
                                                int jobs = 1,
                                                const DamageGenerator& generator = {}) {
  cfg.validate();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] <= 0 || alphas[i] > cfg.c_max + 1e-12)
      throw ConfigError("alpha_sweep: alphas must lie in (0, c_max]");
    if (i > 0 && alphas[i] <= alphas[i - 1])
      throw ConfigError("alpha_sweep: alphas must be strictly ascending");
  }
  const std::vector<double> base_grid = cfg.alpha_grid();

  std::vector<AlphaSweepPoint> points;
  for (double alpha : alphas) {
    AttackConfig capped = cfg;
    capped.alpha_grid_override.clear();
    for (double g : base_grid)
      if (g <= alpha + 1e-9) capped.alpha_grid_override.push_back(g);
    if (capped.alpha_grid_override.empty())
      throw ConfigError("alpha_sweep: alpha below the first grid step");
    capped.c_max = alpha;

    const DatasetAttackOutcome outcome = attack_dataset(dataset, oracle, capped, jobs, generator);
    AlphaSweepPoint p;
    p.alpha = alpha;
    p.asr = outcome.asr;
    double ssim_sum = 0.0;
    std::size_t n = 0;
    for (const auto& rec : outcome.items) {
      if (!rec.attacked) continue;
      ssim_sum += ssim(rec.result.adversarial_image, dataset.items[rec.index].image);
      ++n;
    }
    p.mean_ssim = n ? ssim_sum / static_cast<double>(n) : 1.0;
    points.push_back(p);
  }
  return points;
}

}  // namespace advwt
