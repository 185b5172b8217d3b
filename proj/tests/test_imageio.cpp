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

#include <gtest/gtest.h>
#include <zlib.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "colorkeep/codec.hpp"
#include "colorkeep/image.hpp"
#include "test_support.hpp"

namespace colorkeep {
namespace {

using Bytes = std::vector<std::uint8_t>;

Bytes as_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

void put32(Bytes& b, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>(v >> shift));
}

void chunk(Bytes& out, const char* type, const Bytes& data) {
  put32(out, static_cast<std::uint32_t>(data.size()));
  Bytes td(type, type + 4);
  td.insert(td.end(), data.begin(), data.end());
  out.insert(out.end(), td.begin(), td.end());
  put32(out, static_cast<std::uint32_t>(crc32(0, td.data(), static_cast<uInt>(td.size()))));
}

// Minimal single-IDAT PNG with filter 0 on every row.
Bytes make_png(std::uint32_t w, std::uint32_t h, std::uint8_t depth, std::uint8_t color_type,
               const Bytes& samples) {
  Bytes out{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  Bytes ihdr;
  put32(ihdr, w);
  put32(ihdr, h);
  ihdr.insert(ihdr.end(), {depth, color_type, 0, 0, 0});
  chunk(out, "IHDR", ihdr);
  const std::size_t stride = samples.size() / h;
  Bytes raw;
  for (std::uint32_t y = 0; y < h; ++y) {
    raw.push_back(0);
    raw.insert(raw.end(), samples.begin() + y * stride, samples.begin() + (y + 1) * stride);
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  Bytes z(len);
  compress(z.data(), &len, raw.data(), static_cast<uLong>(raw.size()));
  z.resize(len);
  chunk(out, "IDAT", z);
  chunk(out, "IEND", {});
  return out;
}

Errc decode_error(const Bytes& bytes, ImageFormat f) {
  try {
    decode_image(bytes, f);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected decode to fail";
  return Errc::usage;
}

std::filesystem::path data_file(const char* name) {
  return std::filesystem::path(COLORKEEP_TEST_DATA) / name;
}

TEST(Ppm, DecodesTwoPixelPayload) {
  Bytes bytes = as_bytes("P6\n2 1\n255\n");
  bytes.insert(bytes.end(), {255, 0, 0, 0, 255, 0});
  const ImageU8 img = decode_image(bytes, ImageFormat::ppm);
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.height, 1u);
  EXPECT_EQ(img.data, (Bytes{255, 0, 0, 0, 255, 0}));
}

TEST(Ppm, HeaderCommentsAndArbitraryWhitespace) {
  Bytes bytes = as_bytes("P6 # made by hand\n 1\t1 # size\n255\n");
  bytes.insert(bytes.end(), {1, 2, 3});
  EXPECT_EQ(decode_image(bytes, ImageFormat::ppm).data, (Bytes{1, 2, 3}));
}

TEST(Ppm, ZeroWidthIsDimensionError) {
  EXPECT_EQ(decode_error(as_bytes("P6 0 1 255\n"), ImageFormat::ppm), Errc::dimension);
}

TEST(Ppm, MalformedAndTruncated) {
  EXPECT_EQ(decode_error(as_bytes("P3 1 1 255\n000"), ImageFormat::ppm), Errc::format);
  EXPECT_EQ(decode_error(as_bytes("P6 x 1 255\n"), ImageFormat::ppm), Errc::format);
  EXPECT_EQ(decode_error(as_bytes("P6 2 2 255\n\x01\x02"), ImageFormat::ppm), Errc::truncated);
  EXPECT_EQ(decode_error(as_bytes("P6 2 2"), ImageFormat::ppm), Errc::truncated);
  EXPECT_EQ(decode_error(as_bytes("P6 1 1 65535\n"), ImageFormat::ppm), Errc::unsupported_depth);
}

TEST(Ppm, EncodeIsBitExact) {
  const Bytes black{0, 0, 0};
  ImageU8 img(1, 1);
  img.data = black;
  const Bytes expected = testing::reference_ppm(1, 1, black);
  // "P6\n1 1\n255\n" is 11 bytes, plus three samples.
  ASSERT_EQ(expected.size(), 14u);
  EXPECT_EQ(encode_image(img, ImageFormat::ppm), expected);

  img.data = {255, 255, 255};
  EXPECT_EQ(encode_image(img, ImageFormat::ppm), testing::reference_ppm(1, 1, img.data));
}

TEST(Png, GrayscaleIsReplicated) {
  const ImageU8 img = decode_image(make_png(1, 1, 8, 0, {128}), ImageFormat::png);
  EXPECT_EQ(img.data, (Bytes{128, 128, 128}));
}

TEST(Png, SixteenBitIsUnsupported) {
  EXPECT_EQ(decode_error(make_png(1, 1, 16, 2, Bytes(6, 0)), ImageFormat::png), Errc::unsupported_depth);
  EXPECT_EQ(decode_error(read_file(data_file("gray16.png")), ImageFormat::png), Errc::unsupported_depth);
}

TEST(Png, TruncationAndCorruption) {
  Bytes good = make_png(4, 4, 8, 2, Bytes(48, 7));
  Bytes cut(good.begin(), good.end() - 20);
  EXPECT_EQ(decode_error(cut, ImageFormat::png), Errc::truncated);

  Bytes bad_crc = good;
  bad_crc[30] ^= 0xff;  // inside IHDR/IDAT
  EXPECT_EQ(decode_error(bad_crc, ImageFormat::png), Errc::format);

  EXPECT_EQ(decode_error(as_bytes("not a png"), ImageFormat::png), Errc::format);
  EXPECT_EQ(decode_error(make_png(0, 1, 8, 2, {}), ImageFormat::png), Errc::dimension);
}

TEST(Png, DecodesFilesFromAnotherEncoder) {
  for (const char* stem : {"rgb_interlaced", "rgba", "palette", "gray_alpha"}) {
    SCOPED_TRACE(stem);
    const ImageU8 got = read_image(data_file((std::string(stem) + ".png").c_str()));
    const ImageU8 expected = read_image(data_file((std::string(stem) + "_expected.ppm").c_str()));
    EXPECT_EQ(got, expected);
  }
}

TEST(Codec, RoundTripIsLossless) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 40);
    const ImageU8 img = testing::random_image_u8(rng, dim(rng), dim(rng));
    for (ImageFormat f : {ImageFormat::png, ImageFormat::ppm}) {
      EXPECT_EQ(decode_image(encode_image(img, f), f), img);
    }
  }
}

TEST(Codec, SniffAndExtension) {
  const ImageU8 img(2, 2);
  EXPECT_EQ(sniff_format(encode_image(img, ImageFormat::png)), ImageFormat::png);
  EXPECT_EQ(sniff_format(encode_image(img, ImageFormat::ppm)), ImageFormat::ppm);
  EXPECT_EQ(sniff_format(as_bytes("GIF89a")), std::nullopt);
  EXPECT_EQ(format_from_extension("a/b.PNG"), ImageFormat::png);
  EXPECT_EQ(format_from_extension("x.ppm"), ImageFormat::ppm);
  EXPECT_EQ(format_from_extension("x.jpg"), std::nullopt);
}

TEST(Quantize, ToFloatValues) {
  ImageU8 img(3, 1);
  img.data = {0, 255, 128, 0, 0, 0, 0, 0, 0};
  const ImagePlanarF f = to_float(img);
  EXPECT_EQ(f.planes[0][0], 0.0);
  EXPECT_EQ(f.planes[1][0], 1.0);
  EXPECT_EQ(f.planes[2][0], 128.0 / 255.0);
}

TEST(Quantize, ToU8RoundsHalfAwayFromZeroAndClamps) {
  ImagePlanarF f(1, 1);
  f.planes[0][0] = 1.0;
  f.planes[1][0] = 0.5;
  f.planes[2][0] = -0.2;
  EXPECT_EQ(to_u8(f).data, (Bytes{255, 128, 0}));
  f.planes[2][0] = 7.0;
  EXPECT_EQ(to_u8(f).data[2], 255);
}

TEST(Quantize, NonFiniteIsNumericError) {
  ImagePlanarF f(1, 1);
  f.planes[1][0] = std::nan("");
  try {
    to_u8(f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::numeric);
  }
}

TEST(Quantize, U8RoundTripIsExactForAllValues) {
  ImageU8 img(256, 1);
  for (int v = 0; v < 256; ++v) {
    img.data[3 * v] = static_cast<std::uint8_t>(v);
    img.data[3 * v + 1] = static_cast<std::uint8_t>(255 - v);
    img.data[3 * v + 2] = static_cast<std::uint8_t>((v * 7) & 0xff);
  }
  const ImagePlanarF f = to_float(img);
  EXPECT_TRUE(f.in_unit_range());
  EXPECT_EQ(to_u8(f), img);
}

TEST(Resample, NearestNeighbourPicksCentres) {
  ImagePlanarF src(2, 1);
  src.planes[0] = {0.25, 0.75};
  const ImagePlanarF up = resample_nearest(src, 4, 1);
  EXPECT_EQ(up.planes[0], (std::vector<double>{0.25, 0.25, 0.75, 0.75}));
  const ImagePlanarF down = resample_nearest(up, 2, 1);
  EXPECT_EQ(down.planes[0], src.planes[0]);
}

}  // namespace
}  // namespace colorkeep
