#include <gtest/gtest.h>

#include "advwt/signs.hpp"

using namespace advwt;

namespace {

// Pixel-mass centroid of the glyph mask, recovered by rendering the class
// twice with contrasting glyph colors and diffing.
std::pair<double, double> glyph_centroid(SignClass cls, int resolution) {
  RenderParams p;  // rotation 0, scale 1, no noise
  p.noise_sigma = 0.0;
  p.rotation_deg = 0.0;
  p.scale = 1.0;
  const Image a = render_sign(cls, p, resolution);
  SignClass alt = cls;
  alt.fg = Rgb{cls.fg.r > 0.5f ? 0.0f : 1.0f, cls.fg.g > 0.5f ? 0.0f : 1.0f,
               cls.fg.b > 0.5f ? 0.0f : 1.0f};
  const Image b = render_sign(alt, p, resolution);
  double sx = 0, sy = 0, mass = 0;
  for (int y = 0; y < resolution; ++y)
    for (int x = 0; x < resolution; ++x) {
      double d = 0;
      for (int c = 0; c < 3; ++c) d += std::abs(a.at(y, x, c) - b.at(y, x, c));
      if (d > 1e-6) {
        sx += x;
        sy += y;
        mass += 1;
      }
    }
  if (mass == 0) return {resolution / 2.0, resolution / 2.0};
  return {sx / mass, sy / mass};
}

}  // namespace

TEST(RenderSign, DeterministicInAllInputs) {
  const auto catalog = default_catalog();
  RenderParams p;
  p.rotation_deg = 7.5;
  p.scale = 0.85;
  p.illumination_gain = 1.1;
  p.noise_sigma = 0.03;
  p.seed = 99;
  const Image a = render_sign(catalog[3], p, 64);
  const Image b = render_sign(catalog[3], p, 64);
  EXPECT_EQ(a.data, b.data);
}

TEST(RenderSign, IlluminationGainIsMonotone) {
  const auto catalog = default_catalog();
  RenderParams lo, hi;
  lo.illumination_gain = 1.0;
  hi.illumination_gain = 1.4;
  lo.seed = hi.seed = 5;
  lo.noise_sigma = hi.noise_sigma = 0.02;
  const Image a = render_sign(catalog[1], lo, 64);
  const Image b = render_sign(catalog[1], hi, 64);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    EXPECT_GE(b.data[i], a.data[i] - 1e-6f);
    EXPECT_LE(b.data[i], 1.0f);
  }
}

TEST(RenderSign, GlyphCentroidNearCenterForEveryClass) {
  const int res = 64;
  for (const SignClass& cls : default_catalog()) {
    if (cls.glyph.empty()) continue;  // yield carries no glyph
    const auto [cx, cy] = glyph_centroid(cls, res);
    EXPECT_NEAR(cx, res / 2.0, 2.0) << "class " << cls.id;
    EXPECT_NEAR(cy, res / 2.0, 2.0) << "class " << cls.id;
  }
}

TEST(RenderSign, UnknownGlyphThrows) {
  SignClass cls = default_catalog()[0];
  cls.glyph = "Z#";
  EXPECT_THROW(render_sign(cls, RenderParams{}, 64), std::invalid_argument);
  EXPECT_THROW(render_sign(default_catalog()[0], RenderParams{}, 16), std::invalid_argument);
}

TEST(RenderSign, DistinctClassesDiffer) {
  const auto catalog = default_catalog();
  RenderParams p;
  std::vector<Image> renders;
  for (const auto& cls : catalog) renders.push_back(render_sign(cls, p, 64));
  for (std::size_t i = 0; i < renders.size(); ++i)
    for (std::size_t j = i + 1; j < renders.size(); ++j) {
      double l1 = 0;
      for (std::size_t k = 0; k < renders[i].data.size(); ++k)
        l1 += std::abs(renders[i].data[k] - renders[j].data[k]);
      l1 /= static_cast<double>(renders[i].data.size());
      EXPECT_GE(l1, 0.02) << "classes " << i << " vs " << j;
    }
}

TEST(GenerateDataset, SplitArithmeticAndBalance) {
  const auto catalog = default_catalog();
  auto [train, test] = generate_dataset(catalog, 50, 42, 48);
  EXPECT_EQ(train.items.size(), 400u);
  EXPECT_EQ(test.items.size(), 100u);
  std::vector<int> train_counts(10, 0), test_counts(10, 0);
  for (const auto& it : train.items) ++train_counts[it.label];
  for (const auto& it : test.items) ++test_counts[it.label];
  for (int c = 0; c < 10; ++c) {
    EXPECT_EQ(train_counts[c], 40);
    EXPECT_EQ(test_counts[c], 10);
  }
}

TEST(GenerateDataset, DeterministicAndSeedSensitive) {
  const auto catalog = default_catalog();
  auto [train_a, test_a] = generate_dataset(catalog, 4, 7, 48);
  auto [train_b, test_b] = generate_dataset(catalog, 4, 7, 48);
  ASSERT_EQ(train_a.items.size(), train_b.items.size());
  for (std::size_t i = 0; i < train_a.items.size(); ++i)
    EXPECT_EQ(train_a.items[i].image.data, train_b.items[i].image.data);

  bool any_diff = false;
  for (std::uint64_t seed2 = 8; seed2 < 11 && !any_diff; ++seed2) {
    auto [train_c, test_c] = generate_dataset(catalog, 4, seed2, 48);
    for (std::size_t i = 0; i < train_a.items.size() && !any_diff; ++i)
      any_diff = train_a.items[i].image.data != train_c.items[i].image.data;
  }
  EXPECT_TRUE(any_diff);
}

TEST(GenerateDataset, ArgumentErrors) {
  EXPECT_THROW(generate_dataset({}, 10, 0, 48), std::invalid_argument);
  EXPECT_THROW(generate_dataset(default_catalog(), 1, 0, 48), std::invalid_argument);
}

TEST(LoadExternal, SortedClassOrderAndErrors) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "advwt_test_external";
  fs::remove_all(root);
  // create classes in reverse name order to prove the sort contract
  fs::create_directories(root / "b_class");
  fs::create_directories(root / "a_class");
  const auto catalog = default_catalog();
  RenderParams p;
  for (int i = 0; i < 3; ++i) {
    p.seed = i;
    save_image(render_sign(catalog[0], p, 40), root / "a_class" / ("img" + std::to_string(i) + ".png"));
    save_image(render_sign(catalog[5], p, 40), root / "b_class" / ("img" + std::to_string(i) + ".png"));
  }
  const LabeledDataset ds = load_external(root, 32);
  EXPECT_EQ(ds.items.size(), 6u);
  EXPECT_EQ(ds.catalog.size(), 2u);
  EXPECT_EQ(ds.catalog[0].glyph, "a_class");
  EXPECT_EQ(ds.catalog[1].glyph, "b_class");
  std::vector<int> labels;
  for (const auto& it : ds.items) {
    labels.push_back(it.label);
    EXPECT_EQ(it.image.width, 32);
  }
  EXPECT_EQ(labels, (std::vector<int>{0, 0, 0, 1, 1, 1}));

  // corrupt file is reported by name
  write_file_bytes(root / "a_class" / "broken.png", {9, 9, 9});
  try {
    load_external(root, 32);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.png"), std::string::npos);
  }

  fs::remove_all(root);
  EXPECT_THROW(load_external(root, 32), ConfigError);
}
