#pragma once

// Procedural traffic-sign rendering and synthetic dataset generation.
// Geometry is evaluated in a unit coordinate frame and rasterized with 2x2
// supersampling (4 samples per output pixel), so output is deterministic in
// (class, params, resolution) regardless of traversal or parallelism.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "advwt/image.hpp"
#include "advwt/image_io.hpp"

namespace advwt {

enum class SignShape { Circle, Triangle, Octagon, Square };

struct SignClass {
  int id = 0;
  SignShape shape = SignShape::Circle;
  std::string glyph;  // digits, "STOP", "", "BAR", "ARROW_L", "ARROW_R"
  Rgb fg, bg, rim;
  double rim_width = 0.07;  // unit-frame border band
};

struct RenderParams {
  double rotation_deg = 0.0;        // [-15, 15]
  double scale = 1.0;               // [0.7, 1.0]
  Rgb bg_tint{0.55f, 0.6f, 0.65f};  // scene behind the sign
  double illumination_gain = 1.0;   // [0.6, 1.4]
  double noise_sigma = 0.0;         // [0, 0.05]
  std::uint64_t seed = 0;
};

enum class Split { Train, Test };

struct LabeledDataset {
  struct Item {
    Image image;
    int label = 0;
  };
  std::vector<Item> items;
  std::vector<SignClass> catalog;
  Split split_tag = Split::Train;

  int num_classes() const { return static_cast<int>(catalog.size()); }
};

namespace glyphs {

// 5x7 bitmap font, enough for speed-limit digits and STOP.
inline const std::map<char, std::array<const char*, 7>>& font() {
  static const std::map<char, std::array<const char*, 7>> f = {
      {'0', {"01110", "10001", "10011", "10101", "11001", "10001", "01110"}},
      {'1', {"00100", "01100", "00100", "00100", "00100", "00100", "01110"}},
      {'2', {"01110", "10001", "00001", "00010", "00100", "01000", "11111"}},
      {'3', {"01110", "10001", "00001", "00110", "00001", "10001", "01110"}},
      {'4', {"00010", "00110", "01010", "10010", "11111", "00010", "00010"}},
      {'5', {"11111", "10000", "11110", "00001", "00001", "10001", "01110"}},
      {'6', {"00110", "01000", "10000", "11110", "10001", "10001", "01110"}},
      {'7', {"11111", "00001", "00010", "00100", "01000", "01000", "01000"}},
      {'8', {"01110", "10001", "10001", "01110", "10001", "10001", "01110"}},
      {'9', {"01110", "10001", "10001", "01111", "00001", "00010", "01100"}},
      {'S', {"01111", "10000", "10000", "01110", "00001", "00001", "11110"}},
      {'T', {"11111", "00100", "00100", "00100", "00100", "00100", "00100"}},
      {'O', {"01110", "10001", "10001", "10001", "10001", "10001", "01110"}},
      {'P', {"11110", "10001", "10001", "11110", "10000", "10000", "10000"}},
  };
  return f;
}

inline bool is_token(const std::string& g) {
  return g.empty() || g == "BAR" || g == "ARROW_L" || g == "ARROW_R";
}

inline void check_glyph(const std::string& g) {
  if (is_token(g)) return;
  for (char c : g)
    if (!font().count(c))
      throw std::invalid_argument("render_sign: unknown glyph code '" + g + "'");
}

// Text glyph hit test; p is in sign coordinates centered at origin.
// Character size shrinks with text length so long texts stay inside the
// sign interior (asymmetric clipping would pull the glyph centroid off
// center).
inline bool text_hit(const std::string& text, double px, double py) {
  const int n = static_cast<int>(text.size());
  if (n == 0) return false;
  const double char_w = n <= 2 ? 0.30 : (n == 3 ? 0.58 : 0.52) / (n + 0.22 * (n - 1));
  const double hh = char_w * 7.0 / 5.0 / 2.0;
  const double gap = char_w * 0.22;
  const double total_w = n * char_w + (n - 1) * gap;
  const double left = -total_w / 2.0;

  // re-center on the lit-cell mass centroid; bitmap glyphs are not
  // individually balanced ('3' leans right) but the rendered text must be
  const double cell_w = char_w / 5.0;
  const double cell_h = 2.0 * hh / 7.0;
  double mass = 0, mx = 0, my = 0;
  for (int ci = 0; ci < n; ++ci) {
    const auto& rows = font().at(text[ci]);
    const double cx0 = left + ci * (char_w + gap);
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (rows[row][col] == '1') {
          mx += cx0 + (col + 0.5) * cell_w;
          my += -hh + (row + 0.5) * cell_h;
          mass += 1;
        }
  }
  if (mass > 0) {
    px += mx / mass;
    py += my / mass;
  }

  if (py < -hh || py >= hh) return false;
  const double rel_x = px - left;
  if (rel_x < 0) return false;
  const double cell = char_w + gap;
  const int ci = static_cast<int>(rel_x / cell);
  if (ci >= n) return false;
  const double in_x = rel_x - ci * cell;
  if (in_x >= char_w) return false;  // inter-character gap
  const int col = std::min(4, static_cast<int>(in_x / char_w * 5.0));
  const int row = std::min(6, static_cast<int>((py + hh) / (2.0 * hh) * 7.0));
  return font().at(text[ci])[row][col] == '1';
}

// Arrow dimensions balanced so the pixel-mass centroid sits at the origin.
inline bool arrow_hit(bool left, double px, double py) {
  const double x = left ? px : -px;
  // shaft
  if (x >= -0.11 && x <= 0.36 && std::abs(py) <= 0.065) return true;
  // head: triangle, tip at x=-0.32, base at x=-0.11 spanning |py| <= 0.19
  if (x >= -0.32 && x < -0.11) {
    const double t = (x + 0.32) / 0.21;  // 0 at tip, 1 at base
    return std::abs(py) <= 0.19 * t;
  }
  return false;
}

inline bool bar_hit(double px, double py) {
  return std::abs(px) <= 0.30 && std::abs(py) <= 0.08;
}

}  // namespace glyphs

namespace detail {

// Signed interior tests in sign coordinates (origin at center, unit frame
// [-0.5, 0.5]). Returns distance-ish margin >= 0 inside the outer border.
inline bool shape_hit(SignShape shape, double x, double y, double shrink) {
  switch (shape) {
    case SignShape::Circle: {
      const double rr = 0.46 - shrink;
      return x * x + y * y <= rr * rr;
    }
    case SignShape::Square: {
      const double h = 0.44 - shrink;
      return std::abs(x) <= h && std::abs(y) <= h;
    }
    case SignShape::Octagon: {
      const double h = 0.46 - shrink;
      return std::abs(x) <= h && std::abs(y) <= h &&
             std::abs(x) + std::abs(y) <= h * 1.3066;  // regular octagon cut
    }
    case SignShape::Triangle: {
      // downward-pointing triangle: apex (0, 0.48), base y = -0.40
      const double top = 0.48 - shrink * 2.4;
      const double base = -0.40 + shrink * 1.2;
      if (y > top || y < base) return false;
      const double t = (top - y) / (top - base);  // 0 at apex, 1 at base
      return std::abs(x) <= 0.5 * t * (0.92 - shrink * 2.0);
    }
  }
  return false;
}

inline Rgb sample_sign_color(const SignClass& cls, const RenderParams& p,
                             double ux, double uy) {
  // inverse view transform: center, rotate back, unscale
  const double ang = -p.rotation_deg * std::numbers::pi / 180.0;
  const double ca = std::cos(ang), sa = std::sin(ang);
  double x = ux - 0.5, y = uy - 0.5;
  const double rx = (ca * x - sa * y) / p.scale;
  const double ry = (sa * x + ca * y) / p.scale;

  if (!shape_hit(cls.shape, rx, ry, 0.0)) return p.bg_tint;
  if (!shape_hit(cls.shape, rx, ry, cls.rim_width)) return cls.rim;

  bool glyph = false;
  if (cls.glyph == "BAR")
    glyph = glyphs::bar_hit(rx, ry);
  else if (cls.glyph == "ARROW_L")
    glyph = glyphs::arrow_hit(true, rx, ry);
  else if (cls.glyph == "ARROW_R")
    glyph = glyphs::arrow_hit(false, rx, ry);
  else if (!cls.glyph.empty())
    glyph = glyphs::text_hit(cls.glyph, rx, ry);
  return glyph ? cls.fg : cls.bg;
}

}  // namespace detail

inline Image render_sign(const SignClass& cls, const RenderParams& params,
                         int resolution) {
  if (resolution < 32) throw std::invalid_argument("render_sign: resolution < 32");
  glyphs::check_glyph(cls.glyph);

  Image out(resolution, resolution, 3);
  const double inv = 1.0 / resolution;
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      // 4x supersampling on a 2x2 subgrid
      double acc[3] = {0, 0, 0};
      for (int sy = 0; sy < 2; ++sy)
        for (int sx = 0; sx < 2; ++sx) {
          const double ux = (x + 0.25 + 0.5 * sx) * inv;
          const double uy = (y + 0.25 + 0.5 * sy) * inv;
          const Rgb c = detail::sample_sign_color(cls, params, ux, uy);
          acc[0] += c.r;
          acc[1] += c.g;
          acc[2] += c.b;
        }
      // illumination, then per-pixel seeded noise, then clamp
      for (int c = 0; c < 3; ++c) {
        double v = (acc[c] / 4.0) * params.illumination_gain;
        if (params.noise_sigma > 0.0) {
          const std::uint64_t key =
              rng::hash4(params.seed, static_cast<std::uint64_t>(y),
                         static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(c));
          const double u1 = 1.0 - rng::unit_from_hash(key);
          const double u2 = rng::unit_from_hash(rng::hash_combine(key, 0x717Eu));
          const double n = std::sqrt(-2.0 * std::log(u1)) *
                           std::cos(2.0 * std::numbers::pi * u2);
          v += params.noise_sigma * n;
        }
        out.at(y, x, c) = clamp01(static_cast<float>(v));
      }
    }
  }
  return out;
}

// Ten classes, mirroring a small speed-limit/regulatory catalog.
inline std::vector<SignClass> default_catalog() {
  const Rgb white{0.96f, 0.96f, 0.96f};
  const Rgb red{0.78f, 0.08f, 0.10f};
  const Rgb blue{0.10f, 0.25f, 0.70f};
  const Rgb black{0.03f, 0.03f, 0.03f};
  std::vector<SignClass> cat;
  // thin uniform rim on the speed series leaves room for large digits
  auto speed = [&](int id, const char* text) {
    cat.push_back({id, SignShape::Circle, text, black, white, red, 0.055});
  };
  speed(0, "30");
  speed(1, "50");
  speed(2, "60");
  speed(3, "80");
  speed(4, "100");
  cat.push_back({5, SignShape::Octagon, "STOP", white, red, white, 0.07});
  cat.push_back({6, SignShape::Triangle, "", white, white, red, 0.07});
  cat.push_back({7, SignShape::Circle, "BAR", white, red, white, 0.07});
  cat.push_back({8, SignShape::Circle, "ARROW_L", white, blue, white, 0.07});
  cat.push_back({9, SignShape::Circle, "ARROW_R", white, blue, white, 0.07});
  return cat;
}

namespace detail {

inline RenderParams draw_render_params(std::uint64_t item_seed) {
  rng::Rng r(item_seed);
  RenderParams p;
  p.rotation_deg = r.uniform(-15.0, 15.0);
  p.scale = r.uniform(0.7, 1.0);
  p.bg_tint = Rgb{static_cast<float>(r.uniform(0.3, 0.75)),
                  static_cast<float>(r.uniform(0.3, 0.75)),
                  static_cast<float>(r.uniform(0.3, 0.75))};
  p.illumination_gain = r.uniform(0.6, 1.4);
  p.noise_sigma = r.uniform(0.0, 0.05);
  p.seed = rng::hash_combine(item_seed, 0x4015Eu);
  return p;
}

}  // namespace detail

// 80/20 split; every item's params come from hash(seed, class, index) so
// generation order (or parallel generation) cannot change the result.
inline std::pair<LabeledDataset, LabeledDataset> generate_dataset(
    const std::vector<SignClass>& catalog, int n_per_class, std::uint64_t seed,
    int resolution) {
  if (catalog.empty()) throw std::invalid_argument("generate_dataset: empty catalog");
  if (n_per_class < 2) throw std::invalid_argument("generate_dataset: n_per_class < 2");

  LabeledDataset train, test;
  train.catalog = test.catalog = catalog;
  train.split_tag = Split::Train;
  test.split_tag = Split::Test;
  const int n_train = n_per_class * 4 / 5;

  for (const SignClass& cls : catalog) {
    for (int i = 0; i < n_per_class; ++i) {
      const std::uint64_t item_seed =
          rng::hash3(seed, static_cast<std::uint64_t>(cls.id), static_cast<std::uint64_t>(i));
      const RenderParams p = detail::draw_render_params(item_seed);
      Image img = render_sign(cls, p, resolution);
      auto& dst = (i < n_train) ? train : test;
      dst.items.push_back({std::move(img), cls.id});
    }
  }
  return {std::move(train), std::move(test)};
}

// Directory-per-class ingestion; subdirectory names sorted lexicographically
// define the label ids.
inline LabeledDataset load_external(const std::filesystem::path& dir, int resolution) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("load_external: not a directory: " + dir.string());

  std::vector<std::string> class_names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) class_names.push_back(e.path().filename().string());
  std::sort(class_names.begin(), class_names.end());
  if (class_names.empty()) throw ConfigError("load_external: no class subdirectories in " + dir.string());

  LabeledDataset ds;
  ds.split_tag = Split::Test;
  for (std::size_t label = 0; label < class_names.size(); ++label) {
    SignClass cls;
    cls.id = static_cast<int>(label);
    cls.glyph = class_names[label];
    ds.catalog.push_back(cls);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / class_names[label]))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        Image img = load_image(f);
        ds.items.push_back({resize(img, resolution, resolution), static_cast<int>(label)});
      } catch (const IoError& e) {
        throw IoError("load_external: failed on " + f.string() + ": " + e.what());
      }
    }
  }
  if (ds.items.empty()) throw ConfigError("load_external: no images under " + dir.string());
  return ds;
}

}  // namespace advwt
