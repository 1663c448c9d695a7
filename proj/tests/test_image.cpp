#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "advwt/image.hpp"
#include "advwt/image_io.hpp"

using namespace advwt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "advwt_test_image";
  fs::create_directories(p);
  return p;
}

Image random_image(int w, int h, std::uint64_t seed) {
  Image img(w, h, 3);
  rng::Rng r(seed);
  for (float& v : img.data) v = static_cast<float>(r.next_double());
  return img;
}

}  // namespace

TEST(ImageIo, OnePixelRedPngRoundTrip) {
  Image img(1, 1, 3);
  img.at(0, 0, 0) = 1.0f;
  const auto bytes = encode_png(img);
  const Image back = decode_png(bytes, "mem");
  EXPECT_FLOAT_EQ(back.at(0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(back.at(0, 0, 1), 0.0f);
  EXPECT_FLOAT_EQ(back.at(0, 0, 2), 0.0f);
}

TEST(ImageIo, SaveLoadRoundTripsWithinQuantization) {
  const Image img = random_image(13, 9, 77);
  const fs::path p = temp_dir() / "rt.png";
  save_image(img, p);
  const Image back = load_image(p);
  ASSERT_TRUE(back.same_shape(img));
  for (std::size_t i = 0; i < img.data.size(); ++i)
    EXPECT_NEAR(back.data[i], img.data[i], 1.0f / 255.0f + 1e-6f);

  const fs::path pp = temp_dir() / "rt.ppm";
  save_image(img, pp);
  const Image back2 = load_image(pp);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    EXPECT_NEAR(back2.data[i], img.data[i], 1.0f / 255.0f + 1e-6f);
}

TEST(ImageIo, HalfQuantizesToByte128) {
  // round-half-up: 0.5 * 255 = 127.5 -> 128
  Image img(1, 1, 3);
  for (float& v : img.data) v = 0.5f;
  const auto ppm = encode_ppm(img);
  // header "P6\n1 1\n255\n" is 11 bytes
  ASSERT_EQ(ppm.size(), 11u + 3u);
  EXPECT_EQ(ppm[11], 128);
  EXPECT_EQ(ppm[12], 128);
  EXPECT_EQ(ppm[13], 128);
}

TEST(ImageIo, AllZerosPngDecodesToZeros) {
  Image img(2, 2, 3);
  const Image back = decode_png(encode_png(img), "mem");
  for (float v : back.data) EXPECT_EQ(v, 0.0f);
}

TEST(ImageIo, TruncatedFileIsDecodeError) {
  const Image img = random_image(8, 8, 1);
  auto bytes = encode_png(img);
  bytes.resize(bytes.size() / 2);
  const fs::path p = temp_dir() / "trunc.png";
  write_file_bytes(p, bytes);
  EXPECT_THROW(load_image(p), IoError);
}

TEST(ImageIo, GarbageIsDecodeError) {
  const fs::path p = temp_dir() / "junk.bin";
  write_file_bytes(p, {1, 2, 3, 4, 5});
  EXPECT_THROW(load_image(p), IoError);
}

TEST(ImageIo, UnwritableDestinationIsIoError) {
  const Image img = random_image(4, 4, 2);
  EXPECT_THROW(save_image(img, "/nonexistent_dir_xyz/out.png"), IoError);
}

TEST(ImageIo, ErrorsCarryPathContext) {
  const fs::path p = temp_dir() / "missing_file.png";
  try {
    load_image(p);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing_file.png"), std::string::npos);
  }
}

TEST(Resize, IdenticalDimensionsAreIdentity) {
  const Image img = random_image(17, 11, 5);
  const Image out = resize(img, 17, 11);
  EXPECT_EQ(out.data, img.data);
}

TEST(Resize, ConstantStaysConstant) {
  Image img(6, 4, 3);
  for (float& v : img.data) v = 0.37f;
  const Image out = resize(img, 13, 29);
  for (float v : out.data) EXPECT_NEAR(v, 0.37f, 1e-6f);
}

TEST(Resize, HandComputedBilinearRow) {
  Image img(2, 1, 1);
  img.at(0, 0, 0) = 0.0f;
  img.at(0, 1, 0) = 1.0f;
  const Image out = resize(img, 4, 1);
  // source coords (dx+0.5)/2 - 0.5: clamped edges, interior interpolation
  const float expect[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int x = 0; x < 4; ++x) EXPECT_NEAR(out.at(0, x, 0), expect[x], 1e-6f);
  for (int x = 1; x < 4; ++x) EXPECT_GE(out.at(0, x, 0), out.at(0, x - 1, 0));
}

TEST(Resize, ZeroTargetDimensionThrows) {
  const Image img = random_image(4, 4, 3);
  EXPECT_THROW(resize(img, 0, 4), std::invalid_argument);
}

TEST(Corruption, SeverityZeroIsIdentity) {
  const Image img = random_image(16, 16, 9);
  for (auto kind : {CorruptionKind::Brightness, CorruptionKind::Blur,
                    CorruptionKind::Fog, CorruptionKind::Snow}) {
    const Image out = apply_corruption(img, {kind, 0}, 123);
    EXPECT_EQ(out.data, img.data) << corruption_name(kind);
  }
}

TEST(Corruption, BrightnessSaturates) {
  Image img(4, 4, 3);
  for (float& v : img.data) v = 0.9f;
  const Image out = apply_corruption(img, {CorruptionKind::Brightness, 5}, 0);
  for (float v : out.data) EXPECT_FLOAT_EQ(v, 1.0f);
}

TEST(Corruption, BlurConservesImpulseMass) {
  Image img(33, 33, 1);
  img.at(16, 16, 0) = 1.0f;
  const Image out = apply_corruption(img, {CorruptionKind::Blur, 3}, 0);
  double sum = 0.0;
  for (float v : out.data) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-4);
}

TEST(Corruption, MinimalBlurIsNearIdentityOnSmoothImages) {
  Image img(32, 32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      img.at(y, x, 0) = 0.25f + 0.5f * static_cast<float>(x + y) / 64.0f;
  const Image out = apply_corruption(img, {CorruptionKind::Blur, 1}, 0);
  float linf = 0.0f;
  for (std::size_t i = 0; i < img.data.size(); ++i)
    linf = std::max(linf, std::abs(out.data[i] - img.data[i]));
  EXPECT_LE(linf, 0.05f);
}

TEST(Corruption, DeterministicInSeedAndRangePreserving) {
  const Image img = random_image(24, 24, 4);
  for (auto kind : {CorruptionKind::Brightness, CorruptionKind::Blur,
                    CorruptionKind::Fog, CorruptionKind::Snow}) {
    for (int sev = 1; sev <= 5; ++sev) {
      const Image a = apply_corruption(img, {kind, sev}, 99);
      const Image b = apply_corruption(img, {kind, sev}, 99);
      EXPECT_EQ(a.data, b.data);
      EXPECT_NO_THROW(a.validate());
    }
  }
}

TEST(Corruption, FogAndSnowStrengthGrowsWithSeverity) {
  const Image img = random_image(32, 32, 8);
  double prev_fog = -1.0;
  for (int sev = 1; sev <= 5; ++sev) {
    const Image out = apply_corruption(img, {CorruptionKind::Fog, sev}, 7);
    double dist = 0.0;
    for (std::size_t i = 0; i < img.data.size(); ++i)
      dist += std::abs(out.data[i] - img.data[i]);
    EXPECT_GT(dist, prev_fog);
    prev_fog = dist;
  }
}
