/*
 * Copyright 2026 The colorkeep Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// PNG (8-bit) and binary PPM (P6, maxval 255) readers and writers.
//
// The PNG path handles color types 0, 2, 3, 4 and 6 at bit depth 8, with or
// without Adam7 interlacing. Alpha is dropped and gray is replicated. No
// gamma, sRGB or ICC chunk is interpreted: stored sample values come out
// untouched.

#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"

namespace colorkeep {

enum class ImageFormat { png, ppm };

using Bytes = std::vector<std::uint8_t>;

// Upper bound on decoded sample bytes, well above any desk-scale image.
inline constexpr std::size_t kMaxImageBytes = std::size_t{1} << 31;

namespace detail {

inline void check_dimensions(std::uint64_t w, std::uint64_t h, const char* who) {
  if (w == 0 || h == 0) {
    throw Error(Errc::dimension, std::string(who) + ": width and height must be at least 1");
  }
  if (w > kMaxImageBytes || h > kMaxImageBytes || w * h > kMaxImageBytes / 3) {
    throw Error(Errc::dimension, std::string(who) + ": image too large");
  }
}

// ---------------------------------------------------------------------------
// PPM

inline ImageU8 decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* field) -> std::uint64_t {
    skip_space_and_comments();
    if (pos >= bytes.size()) throw Error(Errc::truncated, std::string("ppm: missing ") + field);
    if (!std::isdigit(bytes[pos])) throw Error(Errc::format, std::string("ppm: bad ") + field);
    std::uint64_t v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > (std::uint64_t{1} << 40)) throw Error(Errc::format, std::string("ppm: ") + field + " overflows");
      ++pos;
    }
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw Error(Errc::format, "ppm: missing P6 magic");
  }
  pos = 2;
  if (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    throw Error(Errc::format, "ppm: malformed magic");
  }
  const std::uint64_t w = read_uint("width");
  const std::uint64_t h = read_uint("height");
  const std::uint64_t maxval = read_uint("maxval");
  if (maxval > 255) throw Error(Errc::unsupported_depth, "ppm: only 8-bit samples are supported");
  if (maxval != 255) throw Error(Errc::format, "ppm: maxval must be 255");
  if (pos >= bytes.size()) throw Error(Errc::truncated, "ppm: header ends early");
  if (!std::isspace(bytes[pos])) throw Error(Errc::format, "ppm: malformed header");
  ++pos;
  check_dimensions(w, h, "ppm");

  ImageU8 img(w, h);
  if (bytes.size() - pos < img.data.size()) throw Error(Errc::truncated, "ppm: payload truncated");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.data.size(), img.data.begin());
  return img;
}

inline Bytes encode_ppm(const ImageU8& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

// ---------------------------------------------------------------------------
// PNG

inline constexpr std::array<std::uint8_t, 8> kPngSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

inline void put_be32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint8_t paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return static_cast<std::uint8_t>(a);
  if (pb <= pc) return static_cast<std::uint8_t>(b);
  return static_cast<std::uint8_t>(c);
}

// Reverses the per-scanline filters in place. `raw` holds `rows` lines of
// (1 + stride) bytes; the result is written to `out` (rows * stride bytes).
inline void unfilter(std::span<const std::uint8_t> raw, std::size_t rows, std::size_t stride,
                     std::size_t bpp, std::vector<std::uint8_t>& out) {
  out.assign(rows * stride, 0);
  for (std::size_t y = 0; y < rows; ++y) {
    const std::uint8_t filter = raw[y * (stride + 1)];
    const std::uint8_t* src = raw.data() + y * (stride + 1) + 1;
    std::uint8_t* cur = out.data() + y * stride;
    const std::uint8_t* prev = y > 0 ? cur - stride : nullptr;
    for (std::size_t x = 0; x < stride; ++x) {
      const int a = x >= bpp ? cur[x - bpp] : 0;
      const int b = prev ? prev[x] : 0;
      const int c = (prev && x >= bpp) ? prev[x - bpp] : 0;
      int v = src[x];
      switch (filter) {
        case 0: break;
        case 1: v += a; break;
        case 2: v += b; break;
        case 3: v += (a + b) / 2; break;
        case 4: v += paeth(a, b, c); break;
        default: throw Error(Errc::format, "png: unknown filter type " + std::to_string(filter));
      }
      cur[x] = static_cast<std::uint8_t>(v);
    }
  }
}

inline Bytes inflate_all(std::span<const std::uint8_t> in, std::size_t expected) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw Error(Errc::format, "png: zlib init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const std::size_t produced = expected - zs.avail_out;
  const bool input_left = zs.avail_in > 0;
  inflateEnd(&zs);
  if (rc == Z_STREAM_END && produced == expected) return out;
  if (rc == Z_DATA_ERROR || rc == Z_NEED_DICT) throw Error(Errc::format, "png: corrupt image data");
  if (rc == Z_STREAM_END) throw Error(Errc::truncated, "png: image data shorter than declared size");
  if (produced == expected && input_left) {
    throw Error(Errc::format, "png: image data longer than declared size");
  }
  throw Error(Errc::truncated, "png: image data truncated");
}

inline ImageU8 decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPngSignature.size() ||
      !std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin())) {
    throw Error(Errc::format, "png: bad signature");
  }
  std::size_t pos = kPngSignature.size();
  std::uint32_t width = 0, height = 0;
  std::uint8_t color_type = 0, interlace = 0;
  bool have_header = false, have_end = false;
  std::vector<std::array<std::uint8_t, 3>> palette;
  Bytes idat;

  while (pos < bytes.size()) {
    if (bytes.size() - pos < 12) throw Error(Errc::truncated, "png: truncated chunk header");
    const std::uint32_t len = read_be32(bytes, pos);
    if (len > 0x7fffffffu) throw Error(Errc::format, "png: chunk too long");
    if (bytes.size() - pos - 12 < len) throw Error(Errc::truncated, "png: truncated chunk");
    const auto type_and_data = bytes.subspan(pos + 4, 4 + len);
    const std::string_view type(reinterpret_cast<const char*>(type_and_data.data()), 4);
    const auto data = type_and_data.subspan(4);
    const std::uint32_t crc = read_be32(bytes, pos + 8 + len);
    const auto computed = static_cast<std::uint32_t>(
        crc32(crc32(0, nullptr, 0), type_and_data.data(), static_cast<uInt>(type_and_data.size())));
    if (crc != computed) throw Error(Errc::format, "png: CRC mismatch in " + std::string(type));
    pos += 12 + len;

    if (!have_header && type != "IHDR") throw Error(Errc::format, "png: IHDR must come first");
    if (type == "IHDR") {
      if (have_header || len != 13) throw Error(Errc::format, "png: malformed IHDR");
      have_header = true;
      width = read_be32(data, 0);
      height = read_be32(data, 4);
      const std::uint8_t depth = data[8];
      color_type = data[9];
      interlace = data[12];
      if (data[10] != 0 || data[11] != 0 || interlace > 1) {
        throw Error(Errc::format, "png: unknown compression, filter or interlace method");
      }
      if (color_type != 0 && color_type != 2 && color_type != 3 && color_type != 4 &&
          color_type != 6) {
        throw Error(Errc::format, "png: invalid color type");
      }
      if (depth != 8) {
        throw Error(Errc::unsupported_depth,
                    "png: bit depth " + std::to_string(depth) + " is not supported (8 only)");
      }
      check_dimensions(width, height, "png");
    } else if (type == "PLTE") {
      if (len % 3 != 0 || len == 0 || len > 768) throw Error(Errc::format, "png: malformed PLTE");
      palette.resize(len / 3);
      for (std::size_t i = 0; i < palette.size(); ++i) {
        palette[i] = {data[3 * i], data[3 * i + 1], data[3 * i + 2]};
      }
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data.begin(), data.end());
    } else if (type == "IEND") {
      have_end = true;
      break;
    } else if ((type[0] & 0x20) == 0) {
      throw Error(Errc::format, "png: unknown critical chunk " + std::string(type));
    }
  }
  if (!have_header) throw Error(Errc::truncated, "png: missing IHDR");
  if (!have_end) throw Error(Errc::truncated, "png: missing IEND");
  if (color_type == 3 && palette.empty()) throw Error(Errc::format, "png: missing PLTE");

  const std::size_t bpp = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 3 ? 1
                        : color_type == 4 ? 2 : 4;

  struct Pass {
    std::size_t x0, y0, dx, dy;
  };
  static constexpr std::array<Pass, 7> kAdam7{{{0, 0, 8, 8}, {4, 0, 8, 8}, {0, 4, 4, 8},
                                               {2, 0, 4, 4}, {0, 2, 2, 4}, {1, 0, 2, 2},
                                               {0, 1, 1, 2}}};
  std::vector<Pass> passes;
  if (interlace == 0) {
    passes.push_back({0, 0, 1, 1});
  } else {
    passes.assign(kAdam7.begin(), kAdam7.end());
  }
  auto pass_size = [&](const Pass& p) {
    const std::size_t pw = width > p.x0 ? (width - p.x0 + p.dx - 1) / p.dx : 0;
    const std::size_t ph = height > p.y0 ? (height - p.y0 + p.dy - 1) / p.dy : 0;
    return std::pair{pw, ph};
  };
  std::size_t expected = 0;
  for (const auto& p : passes) {
    const auto [pw, ph] = pass_size(p);
    if (pw > 0 && ph > 0) expected += ph * (1 + pw * bpp);
  }
  const Bytes raw = inflate_all(idat, expected);

  ImageU8 img(width, height);
  std::size_t offset = 0;
  std::vector<std::uint8_t> lines;
  for (const auto& p : passes) {
    const auto [pw, ph] = pass_size(p);
    if (pw == 0 || ph == 0) continue;
    const std::size_t stride = pw * bpp;
    unfilter(std::span(raw).subspan(offset, ph * (stride + 1)), ph, stride, bpp, lines);
    offset += ph * (stride + 1);
    for (std::size_t y = 0; y < ph; ++y) {
      for (std::size_t x = 0; x < pw; ++x) {
        const std::uint8_t* s = lines.data() + y * stride + x * bpp;
        std::uint8_t* d = img.data.data() + 3 * ((p.y0 + y * p.dy) * width + p.x0 + x * p.dx);
        switch (color_type) {
          case 0:
          case 4: d[0] = d[1] = d[2] = s[0]; break;
          case 2:
          case 6: d[0] = s[0]; d[1] = s[1]; d[2] = s[2]; break;
          case 3: {
            if (s[0] >= palette.size()) throw Error(Errc::format, "png: palette index out of range");
            const auto& e = palette[s[0]];
            d[0] = e[0]; d[1] = e[1]; d[2] = e[2];
            break;
          }
        }
      }
    }
  }
  return img;
}

inline void put_chunk(Bytes& out, std::string_view type, std::span<const std::uint8_t> data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type.begin(), type.end());
  out.insert(out.end(), data.begin(), data.end());
  put_be32(out, static_cast<std::uint32_t>(
                    crc32(crc32(0, nullptr, 0), out.data() + start, static_cast<uInt>(out.size() - start))));
}

inline Bytes encode_png(const ImageU8& img) {
  check_dimensions(img.width, img.height, "png");
  Bytes header;
  put_be32(header, static_cast<std::uint32_t>(img.width));
  put_be32(header, static_cast<std::uint32_t>(img.height));
  header.insert(header.end(), {8, 2, 0, 0, 0});  // depth 8, RGB, deflate, no filter, no interlace

  const std::size_t stride = img.width * 3;
  Bytes raw;
  raw.reserve(img.height * (stride + 1));
  for (std::size_t y = 0; y < img.height; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), img.data.begin() + static_cast<std::ptrdiff_t>(y * stride),
               img.data.begin() + static_cast<std::ptrdiff_t>((y + 1) * stride));
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  Bytes packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error(Errc::io, "png: compression failed");
  }
  packed.resize(packed_size);

  Bytes out(kPngSignature.begin(), kPngSignature.end());
  put_chunk(out, "IHDR", header);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", {});
  return out;
}

}  // namespace detail

inline ImageU8 decode_image(std::span<const std::uint8_t> bytes, ImageFormat format) {
  return format == ImageFormat::png ? detail::decode_png(bytes) : detail::decode_ppm(bytes);
}

inline Bytes encode_image(const ImageU8& img, ImageFormat format) {
  if (img.data.size() != img.pixel_count() * ImageU8::channels) {
    throw Error(Errc::dimension, "encode_image: sample count does not match dimensions");
  }
  return format == ImageFormat::png ? detail::encode_png(img) : detail::encode_ppm(img);
}

/// Format from the leading bytes, if recognizable.
inline std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(detail::kPngSignature.begin(), detail::kPngSignature.end(), bytes.begin())) {
    return ImageFormat::png;
  }
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return ImageFormat::ppm;
  return std::nullopt;
}

/// Format from a file extension (.png, .ppm; case-insensitive).
inline std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (ext == ".png") return ImageFormat::png;
  if (ext == ".ppm") return ImageFormat::ppm;
  return std::nullopt;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "cannot read " + path.string());
  return data;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
}

inline ImageU8 read_image(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  const auto format = sniff_format(data);
  if (!format) throw Error(Errc::format, path.string() + ": not a PNG or P6 PPM file");
  return decode_image(data, *format);
}

inline void write_image(const std::filesystem::path& path, const ImageU8& img) {
  const auto format = format_from_extension(path);
  if (!format) throw Error(Errc::format, path.string() + ": unsupported output extension");
  write_file(path, encode_image(img, *format));
}

}  // namespace colorkeep
