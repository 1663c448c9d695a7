#pragma once

// PNG (8-bit, non-interlaced) and binary PPM (P6) codecs. The chunk and
// filter layer is written here; zlib supplies deflate/inflate and crc32.
// Quantization contract: byte = floor(v*255 + 0.5), load maps byte/255.

#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "advwt/image.hpp"

namespace advwt {
namespace pngio {

inline constexpr std::array<unsigned char, 8> kSignature = {137, 80, 78, 71, 13, 10, 26, 10};

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline void append_chunk(std::vector<unsigned char>& out, const char type[4],
                         const std::vector<unsigned char>& payload) {
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  std::uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + payload.size()));
  put_u32(out, crc);
}

inline std::vector<unsigned char> deflate_all(const std::vector<unsigned char>& raw) {
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> out(bound);
  if (compress2(out.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw IoError("png: deflate failed");
  out.resize(bound);
  return out;
}

inline std::vector<unsigned char> inflate_all(const std::vector<unsigned char>& comp,
                                              std::size_t expected) {
  std::vector<unsigned char> out(expected);
  uLongf dest_len = static_cast<uLongf>(expected);
  const int rc = uncompress(out.data(), &dest_len, comp.data(), static_cast<uLong>(comp.size()));
  if (rc != Z_OK || dest_len != expected) throw IoError("png: inflate failed");
  return out;
}

inline int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace pngio

inline std::vector<unsigned char> encode_png(const Image& img) {
  const int bpp = img.channels;  // 8-bit samples
  const std::size_t stride = static_cast<std::size_t>(img.width) * bpp;
  std::vector<unsigned char> raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) {
        const float v = std::clamp(img.at(y, x, c), 0.0f, 1.0f);
        raw.push_back(static_cast<unsigned char>(std::floor(v * 255.0f + 0.5f)));
      }
  }

  std::vector<unsigned char> out(pngio::kSignature.begin(), pngio::kSignature.end());
  std::vector<unsigned char> ihdr;
  pngio::put_u32(ihdr, static_cast<std::uint32_t>(img.width));
  pngio::put_u32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);                                        // bit depth
  ihdr.push_back(img.channels == 1 ? 0 : 2);                // gray / truecolor
  ihdr.push_back(0); ihdr.push_back(0); ihdr.push_back(0);  // deflate, adaptive, no interlace
  pngio::append_chunk(out, "IHDR", ihdr);
  pngio::append_chunk(out, "IDAT", pngio::deflate_all(raw));
  pngio::append_chunk(out, "IEND", {});
  return out;
}

inline Image decode_png(const std::vector<unsigned char>& bytes, const std::string& ctx) {
  using namespace pngio;
  if (bytes.size() < 8 || !std::equal(kSignature.begin(), kSignature.end(), bytes.begin()))
    throw IoError("png: bad signature: " + ctx);

  std::size_t pos = 8;
  int width = 0, height = 0, bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<unsigned char> idat;
  std::vector<std::array<unsigned char, 3>> palette;
  bool saw_ihdr = false, saw_iend = false;

  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = get_u32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw IoError("png: truncated chunk: " + ctx);
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const unsigned char* payload = &bytes[pos + 8];
    const std::uint32_t stored_crc = get_u32(&bytes[pos + 8 + len]);
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, &bytes[pos + 4], len + 4);
    if (crc != stored_crc) throw IoError("png: chunk crc mismatch: " + ctx);

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw IoError("png: bad IHDR: " + ctx);
      width = static_cast<int>(get_u32(payload));
      height = static_cast<int>(get_u32(payload + 4));
      bit_depth = payload[8];
      color_type = payload[9];
      interlace = payload[12];
      saw_ihdr = true;
    } else if (std::memcmp(type, "PLTE", 4) == 0) {
      if (len % 3 != 0) throw IoError("png: bad PLTE: " + ctx);
      for (std::uint32_t i = 0; i < len; i += 3)
        palette.push_back({payload[i], payload[i + 1], payload[i + 2]});
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
      break;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || !saw_iend || idat.empty()) throw IoError("png: missing chunks: " + ctx);
  if (width <= 0 || height <= 0) throw IoError("png: zero dimensions: " + ctx);
  if (bit_depth != 8) throw IoError("png: unsupported bit depth: " + ctx);
  if (interlace != 0) throw IoError("png: interlaced images unsupported: " + ctx);

  int samples = 0;
  switch (color_type) {
    case 0: samples = 1; break;  // gray
    case 2: samples = 3; break;  // rgb
    case 3: samples = 1; break;  // palette index
    case 4: samples = 2; break;  // gray + alpha
    case 6: samples = 4; break;  // rgba
    default: throw IoError("png: unsupported color type: " + ctx);
  }
  if (color_type == 3 && palette.empty()) throw IoError("png: palette missing: " + ctx);

  const std::size_t stride = static_cast<std::size_t>(width) * samples;
  std::vector<unsigned char> raw = pngio::inflate_all(idat, (stride + 1) * height);

  // undo per-row filters in place
  std::vector<unsigned char> prev(stride, 0);
  std::vector<unsigned char> cur(stride, 0);
  Image out(width, height, 3);
  for (int y = 0; y < height; ++y) {
    const unsigned char filter = raw[(stride + 1) * y];
    const unsigned char* src = &raw[(stride + 1) * y + 1];
    for (std::size_t i = 0; i < stride; ++i) {
      const int a = (i >= static_cast<std::size_t>(samples)) ? cur[i - samples] : 0;
      const int b = prev[i];
      const int c = (i >= static_cast<std::size_t>(samples)) ? prev[i - samples] : 0;
      int v = src[i];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += pngio::paeth(a, b, c); break;
        default: throw IoError("png: bad filter byte: " + ctx);
      }
      cur[i] = static_cast<unsigned char>(v & 0xFF);
    }
    for (int x = 0; x < width; ++x) {
      unsigned char r = 0, g = 0, bch = 0;
      const unsigned char* px = &cur[static_cast<std::size_t>(x) * samples];
      switch (color_type) {
        case 0: case 4: r = g = bch = px[0]; break;
        case 2: case 6: r = px[0]; g = px[1]; bch = px[2]; break;
        case 3: {
          if (px[0] >= palette.size()) throw IoError("png: palette index out of range: " + ctx);
          const auto& e = palette[px[0]];
          r = e[0]; g = e[1]; bch = e[2];
          break;
        }
      }
      out.at(y, x, 0) = r / 255.0f;
      out.at(y, x, 1) = g / 255.0f;
      out.at(y, x, 2) = bch / 255.0f;
    }
    std::swap(prev, cur);
  }
  return out;
}

inline std::vector<unsigned char> encode_ppm(const Image& img) {
  std::string header = "P6\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = img.channels == 3 ? img.at(y, x, c) : img.at(y, x, 0);
        out.push_back(static_cast<unsigned char>(std::floor(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f)));
      }
  return out;
}

inline Image decode_ppm(const std::vector<unsigned char>& bytes, const std::string& ctx) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw IoError("ppm: malformed header: " + ctx);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw IoError("ppm: not a P6 file: " + ctx);
  pos = 2;
  const long w = read_int(), h = read_int(), maxval = read_int();
  if (w <= 0 || h <= 0) throw IoError("ppm: zero dimensions: " + ctx);
  if (maxval != 255) throw IoError("ppm: only maxval 255 supported: " + ctx);
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos < need) throw IoError("ppm: truncated pixel data: " + ctx);
  Image out(static_cast<int>(w), static_cast<int>(h), 3);
  for (std::size_t i = 0; i < need; ++i) out.data[i] = bytes[pos + i] / 255.0f;
  return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open file for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

// Dispatches on magic bytes: PNG signature or "P6".
inline Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() >= 8 && std::equal(pngio::kSignature.begin(), pngio::kSignature.end(), bytes.begin()))
    return decode_png(bytes, path.string());
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6')
    return decode_ppm(bytes, path.string());
  throw IoError("unsupported image format: " + path.string());
}

// PNG unless the extension says .ppm.
inline void save_image(const Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".ppm")
    write_file_bytes(path, encode_ppm(img));
  else
    write_file_bytes(path, encode_png(img));
}

}  // namespace advwt
