#include <gtest/gtest.h>

#include <cmath>

#include "advwt/ganmath.hpp"

using namespace advwt;

namespace {

StyleCode code(std::initializer_list<double> vals) {
  StyleCode s;
  s.values = vals;
  return s;
}

Image constant_image(int w, int h, float v) {
  Image img(w, h, 1);
  for (float& x : img.data) x = v;
  return img;
}

StyleCode random_code(std::size_t n, std::uint64_t seed) {
  StyleCode s(n);
  rng::Rng r(seed);
  for (double& v : s.values) v = r.uniform(-1, 1);
  return s;
}

}  // namespace

TEST(StyleReconstruction, IdentityPermutationAndHandValue) {
  const StyleCode s = random_code(16, 1);
  EXPECT_DOUBLE_EQ(style_reconstruction_loss(s, s), 0.0);
  EXPECT_DOUBLE_EQ(style_reconstruction_loss(code({1, -1}), code({0, 0})), 1.0);
  // joint permutation of both vectors leaves the value unchanged
  const StyleCode a = code({0.3, -0.7, 0.1});
  const StyleCode b = code({-0.2, 0.4, 0.9});
  const StyleCode ap = code({0.1, 0.3, -0.7});
  const StyleCode bp = code({0.9, -0.2, 0.4});
  EXPECT_DOUBLE_EQ(style_reconstruction_loss(a, b), style_reconstruction_loss(ap, bp));
  EXPECT_THROW(style_reconstruction_loss(code({1}), code({1, 2})), std::invalid_argument);
}

TEST(Diversity, HandValuesAndSymmetry) {
  const Image zeros = constant_image(4, 4, 0.0f);
  const Image ones = constant_image(4, 4, 1.0f);
  EXPECT_DOUBLE_EQ(diversity_loss(zeros, zeros), 0.0);
  EXPECT_DOUBLE_EQ(diversity_loss(zeros, ones), -1.0);
  EXPECT_DOUBLE_EQ(diversity_loss(zeros, ones), diversity_loss(ones, zeros));
  EXPECT_LE(diversity_loss(zeros, ones), 0.0);
}

TEST(Cycle, HandValuesAndTriangleInequality) {
  const Image ones = constant_image(4, 4, 1.0f);
  const Image half = constant_image(4, 4, 0.5f);
  EXPECT_DOUBLE_EQ(cycle_loss(ones, ones), 0.0);
  EXPECT_DOUBLE_EQ(cycle_loss(ones, half), 0.5);
  rng::Rng r(3);
  for (int trial = 0; trial < 20; ++trial) {
    Image a(5, 5, 1), b(5, 5, 1), c(5, 5, 1);
    for (int i = 0; i < 25; ++i) {
      a.data[i] = static_cast<float>(r.next_double());
      b.data[i] = static_cast<float>(r.next_double());
      c.data[i] = static_cast<float>(r.next_double());
    }
    EXPECT_LE(cycle_loss(a, c), cycle_loss(a, b) + cycle_loss(b, c) + 1e-9);
  }
}

TEST(Adversarial, LimitsHandValueAndMonotonicity) {
  EXPECT_NEAR(adversarial_loss(1.0, 0.0), 0.0, 1e-6);  // clamped perfect discriminator
  EXPECT_NEAR(adversarial_loss(0.5, 0.5), 2.0 * std::log(0.5), 1e-12);
  double prev = -1e300;
  for (double d = 0.1; d <= 0.9; d += 0.1) {
    const double v = adversarial_loss(d, 0.5);
    EXPECT_GT(v, prev);
    prev = v;
  }
  prev = 1e300;
  for (double d = 0.1; d <= 0.9; d += 0.1) {
    const double v = adversarial_loss(0.5, d);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Triplet, MarginCases) {
  const StyleCode a = code({0, 0});
  const StyleCode n = code({1, 0});  // ||a-n|| = 1
  EXPECT_DOUBLE_EQ(triplet_loss(a, a, n, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(triplet_loss(a, a, a, 0.1), 0.1);
  rng::Rng r(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_code(8, r.next_u64());
    const auto p = random_code(8, r.next_u64());
    const auto ng = random_code(8, r.next_u64());
    EXPECT_GE(triplet_loss(x, p, ng, 0.1), 0.0);
  }
}

TEST(Triplet, InvariantUnderCommonOrthogonalTransform) {
  // compose a few Givens rotations and apply to all three codes
  const std::size_t n = 6;
  auto rotate = [&](StyleCode s) {
    rng::Rng r(42);
    for (int k = 0; k < 10; ++k) {
      const std::size_t i = r.next_below(n);
      std::size_t j = r.next_below(n);
      if (i == j) j = (j + 1) % n;
      const double ang = r.uniform(0, 2 * std::numbers::pi);
      const double c = std::cos(ang), sn = std::sin(ang);
      const double vi = s.values[i], vj = s.values[j];
      s.values[i] = c * vi - sn * vj;
      s.values[j] = sn * vi + c * vj;
    }
    return s;
  };
  const auto a = random_code(n, 5), p = random_code(n, 6), ng = random_code(n, 7);
  const double before = triplet_loss(a, p, ng, 0.1);
  const double after = triplet_loss(rotate(a), rotate(p), rotate(ng), 0.1);
  EXPECT_NEAR(before, after, 1e-9);
}

TEST(KlLoss, StandardNormalIsZeroAndHandValue) {
  GaussianStats st;
  st.mean = {0, 0, 0};
  st.variance = {1, 1, 1};
  EXPECT_DOUBLE_EQ(kl_loss(st), 0.0);
  st.mean = {1};
  st.variance = {1};
  EXPECT_DOUBLE_EQ(kl_loss(st), 0.5);
  GaussianStats bad;
  bad.mean = {0};
  bad.variance = {0};
  EXPECT_THROW(kl_loss(bad), std::invalid_argument);
}

TEST(KlLoss, NonNegativeAndFlatAtPrior) {
  rng::Rng r(13);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianStats st;
    for (int i = 0; i < 5; ++i) {
      st.mean.push_back(r.uniform(-2, 2));
      st.variance.push_back(r.uniform(0.05, 4));
    }
    EXPECT_GE(kl_loss(st), -1e-12);
  }
  // finite-difference gradient of the closed form w.r.t. each mean at 0
  const double h = 1e-4;
  for (int i = 0; i < 3; ++i) {
    GaussianStats plus, minus;
    plus.mean = minus.mean = {0, 0, 0};
    plus.variance = minus.variance = {1, 1, 1};
    plus.mean[i] = h;
    minus.mean[i] = -h;
    const double g = (kl_loss(plus) - kl_loss(minus)) / (2 * h);
    EXPECT_NEAR(g, 0.0, 1e-6);
  }
}

TEST(ContentLoss, IdentityAndPooledHandValue) {
  const Image zeros = constant_image(16, 16, 0.0f);
  const Image ones = constant_image(16, 16, 1.0f);
  EXPECT_DOUBLE_EQ(content_loss(zeros, zeros), 0.0);
  EXPECT_DOUBLE_EQ(content_loss(zeros, ones), 1.0);
}

TEST(ContentLoss, InvariantToBlockMeanPreservingNoise) {
  // 16x16 image pools into 8x8 blocks of 2x2 pixels; adding +d to one pixel
  // and -d to another inside each block keeps every pooled feature fixed.
  Image base(16, 16, 1);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) base.at(y, x, 0) = 0.5f;
  Image noisy = base;
  const float d = 0.25f;
  for (int by = 0; by < 8; ++by)
    for (int bx = 0; bx < 8; ++bx) {
      noisy.at(2 * by, 2 * bx, 0) += d;
      noisy.at(2 * by, 2 * bx + 1, 0) -= d;
    }
  EXPECT_NEAR(content_loss(base, noisy), 0.0, 1e-6);
}

TEST(TotalObjective, ZeroOnesAndLinearity) {
  std::array<double, 7> zeros{};
  EXPECT_DOUBLE_EQ(total_objective(zeros), 0.0);
  std::array<double, 7> ones;
  ones.fill(1.0);
  EXPECT_DOUBLE_EQ(total_objective(ones), 8.0);  // lambda1 = 2, rest 1
  rng::Rng r(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<double, 7> a{}, b{};
    for (int i = 0; i < 7; ++i) {
      a[i] = r.uniform(-2, 2);
      b[i] = r.uniform(-2, 2);
    }
    std::array<double, 7> sum{};
    for (int i = 0; i < 7; ++i) sum[i] = a[i] + b[i];
    EXPECT_NEAR(total_objective(sum), total_objective(a) + total_objective(b), 1e-12);
  }
}

TEST(FitGaussian, MatchesSampleMoments) {
  std::vector<StyleCode> codes;
  codes.push_back(code({1, 3}));
  codes.push_back(code({3, 3}));
  const GaussianStats st = fit_diagonal_gaussian(codes);
  EXPECT_DOUBLE_EQ(st.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(st.mean[1], 3.0);
  EXPECT_DOUBLE_EQ(st.variance[0], 1.0);  // population variance
}
