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

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "colorkeep/error.hpp"
#include "colorkeep/parallel.hpp"

namespace colorkeep {

/// Interleaved 8-bit RGB, row-major.
struct ImageU8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  static constexpr std::size_t channels = 3;

  ImageU8() = default;
  ImageU8(std::size_t w, std::size_t h) : width(w), height(h), data(w * h * channels) {}

  std::size_t pixel_count() const { return width * height; }

  friend bool operator==(const ImageU8&, const ImageU8&) = default;
};

/// Three deinterleaved double planes (R, G, B).
///
/// Images produced by decoding are in [0, 1]. Intermediate results of an
/// unclamped affine map may leave that range; `in_unit_range()` tells which.
struct ImagePlanarF {
  std::size_t width = 0;
  std::size_t height = 0;
  std::array<std::vector<double>, 3> planes;

  ImagePlanarF() = default;
  ImagePlanarF(std::size_t w, std::size_t h) : width(w), height(h) {
    for (auto& p : planes) p.assign(w * h, 0.0);
  }

  std::size_t pixel_count() const { return width * height; }

  bool same_size(const ImagePlanarF& o) const {
    return width == o.width && height == o.height;
  }

  bool in_unit_range() const {
    for (const auto& p : planes) {
      for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const ImagePlanarF&, const ImagePlanarF&) = default;
};

inline ImagePlanarF to_float(const ImageU8& img) {
  ImagePlanarF out(img.width, img.height);
  const std::size_t n = img.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.planes[c][i] = static_cast<double>(img.data[3 * i + c]) / 255.0;
    }
  }
  return out;
}

/// Quantizes with round(clamp(v, 0, 1) * 255), ties away from zero.
inline ImageU8 to_u8(const ImagePlanarF& img) {
  ImageU8 out(img.width, img.height);
  const std::size_t n = img.pixel_count();
  for (std::size_t c = 0; c < 3; ++c) {
    if (img.planes[c].size() != n) throw Error(Errc::dimension, "to_u8: plane size mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double v = img.planes[c][i];
      if (!std::isfinite(v)) throw Error(Errc::numeric, "to_u8: non-finite sample");
      out.data[3 * i + c] = static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 1.0) * 255.0));
    }
  }
  return out;
}

inline void clamp_to_unit(ImagePlanarF& img) {
  for (auto& p : img.planes) {
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
  }
}

/// Nearest-neighbour resample; source pixel = floor((x + 0.5) * src / dst).
inline ImagePlanarF resample_nearest(const ImagePlanarF& src, std::size_t width,
                                     std::size_t height) {
  if (src.width == width && src.height == height) return src;
  if (src.pixel_count() == 0 || width == 0 || height == 0) {
    throw Error(Errc::dimension, "resample_nearest: empty image");
  }
  ImagePlanarF out(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    const std::size_t sy = std::min(src.height - 1, (2 * y + 1) * src.height / (2 * height));
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t sx = std::min(src.width - 1, (2 * x + 1) * src.width / (2 * width));
      for (std::size_t c = 0; c < 3; ++c) {
        out.planes[c][y * width + x] = src.planes[c][sy * src.width + sx];
      }
    }
  }
  return out;
}

/// Grayscale plane replicated into three identical channels.
inline ImagePlanarF replicate_gray(const std::vector<double>& plane, std::size_t width,
                                   std::size_t height) {
  if (plane.size() != width * height) throw Error(Errc::dimension, "replicate_gray: size mismatch");
  ImagePlanarF out;
  out.width = width;
  out.height = height;
  out.planes = {plane, plane, plane};
  return out;
}

}  // namespace colorkeep
