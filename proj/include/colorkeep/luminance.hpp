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
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "colorkeep/affine_transfer.hpp"
#include "colorkeep/colorstats.hpp"
#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"
#include "colorkeep/linalg3.hpp"
#include "colorkeep/parallel.hpp"

namespace colorkeep {

using Plane = std::vector<double>;

/// NTSC RGB -> YIQ.
inline constexpr Mat3 kRgbToYiq{{0.299, 0.587, 0.114,
                                 0.595716, -0.274453, -0.321263,
                                 0.211456, -0.522591, 0.311135}};

/// Inverse of kRgbToYiq, computed once at first use.
inline const Mat3& yiq_to_rgb_matrix() {
  static const Mat3 inv = inverse(kRgbToYiq);
  return inv;
}

struct YiqImage {
  std::size_t width = 0;
  std::size_t height = 0;
  Plane y, i, q;

  std::size_t pixel_count() const { return width * height; }
};

inline YiqImage rgb_to_yiq(const ImagePlanarF& img, Exec exec = {}) {
  const std::size_t n = img.pixel_count();
  YiqImage out{img.width, img.height, Plane(n), Plane(n), Plane(n)};
  const Mat3& m = kRgbToYiq;
  for_each_block(n, exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Vec3 yiq = m * Vec3{{img.planes[0][k], img.planes[1][k], img.planes[2][k]}};
      out.y[k] = yiq[0];
      out.i[k] = yiq[1];
      out.q[k] = yiq[2];
    }
  });
  return out;
}

// Pixels whose clamp moves a channel by more than this are reported as
// out of gamut.
inline constexpr double kGamutSlack = 1e-9;

inline ImagePlanarF yiq_to_rgb(const YiqImage& img, Exec exec = {}) {
  const std::size_t n = img.pixel_count();
  if (img.y.size() != n || img.i.size() != n || img.q.size() != n) {
    throw Error(Errc::dimension, "yiq_to_rgb: plane size mismatch");
  }
  ImagePlanarF out(img.width, img.height);
  const Mat3& m = yiq_to_rgb_matrix();
  for_each_block(n, exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Vec3 rgb = m * Vec3{{img.y[k], img.i[k], img.q[k]}};
      for (std::size_t c = 0; c < 3; ++c) out.planes[c][k] = std::clamp(rgb[c], 0.0, 1.0);
    }
  });
  return out;
}

/// Number of pixels that yiq_to_rgb has to clamp.
inline std::size_t count_out_of_gamut(const YiqImage& img) {
  const Mat3& m = yiq_to_rgb_matrix();
  std::size_t count = 0;
  for (std::size_t k = 0; k < img.pixel_count(); ++k) {
    const Vec3 rgb = m * Vec3{{img.y[k], img.i[k], img.q[k]}};
    for (std::size_t c = 0; c < 3; ++c) {
      if (rgb[c] < -kGamutSlack || rgb[c] > 1.0 + kGamutSlack) {
        ++count;
        break;
      }
    }
  }
  return count;
}

/// Lower bound on the style luminance deviation accepted by match_luminance.
inline constexpr double kMinLuminanceStd = 1e-8;

/// L' = (sigma_t / sigma_s) (L - mu_s) + mu_t, per sample.
inline Plane match_luminance(std::span<const double> style_l, ScalarStats target,
                             ScalarStats source, Clamp clamp = Clamp::on) {
  if (!(source.std > kMinLuminanceStd)) {
    throw Error(Errc::degenerate_luminance,
                "match_luminance: style luminance is constant (std " + std::to_string(source.std) + ")");
  }
  const double gain = target.std / source.std;
  Plane out(style_l.size());
  for (std::size_t k = 0; k < style_l.size(); ++k) {
    double v = gain * (style_l[k] - source.mean) + target.mean;
    if (clamp == Clamp::on) v = std::clamp(v, 0.0, 1.0);
    out[k] = v;
  }
  return out;
}

/// Styled luminance combined with the chroma (I, Q) of the content image.
inline ImagePlanarF recombine(std::span<const double> y_styled, const YiqImage& content,
                              Exec exec = {}) {
  if (y_styled.size() != content.pixel_count()) {
    throw Error(Errc::dimension, "recombine: luminance plane does not match content dimensions");
  }
  YiqImage merged{content.width, content.height, Plane(y_styled.begin(), y_styled.end()),
                  content.i, content.q};
  return yiq_to_rgb(merged, exec);
}

}  // namespace colorkeep
