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

// Shared helpers for the test suites: seeded generators for matrices and
// images, plus brute-force oracles that do not go through the library's
// reduction or factorization code.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "colorkeep/image.hpp"
#include "colorkeep/linalg3.hpp"

namespace colorkeep::testing {

inline Mat3 random_matrix(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat3 m;
  for (double& v : m.m) v = u(rng);
  return m;
}

/// M M^T + shift * I with M uniform in [-1, 1].
inline SymMat3 random_spd(std::mt19937_64& rng, double shift = 0.01) {
  const Mat3 m = random_matrix(rng);
  return add_diagonal(SymMat3::symmetrize(m * m.transposed()), shift);
}

inline SymMat3 random_symmetric(std::mt19937_64& rng) {
  return SymMat3::symmetrize(random_matrix(rng));
}

inline Vec3 random_vec(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {{u(rng), u(rng), u(rng)}};
}

/// Random rotation from Gram-Schmidt on a random matrix.
inline Mat3 random_orthogonal(std::mt19937_64& rng) {
  Mat3 m = random_matrix(rng);
  Vec3 cols[3];
  for (std::size_t k = 0; k < 3; ++k) {
    Vec3 v{{m(0, k), m(1, k), m(2, k)}};
    for (std::size_t j = 0; j < k; ++j) v = v - dot(v, cols[j]) * cols[j];
    cols[k] = (1.0 / norm(v)) * v;
  }
  Mat3 q;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t r = 0; r < 3; ++r) q(r, k) = cols[k][r];
  }
  return q;
}

inline Mat3 permutation(std::size_t a, std::size_t b, std::size_t c) {
  Mat3 p;
  p(0, a) = 1;
  p(1, b) = 1;
  p(2, c) = 1;
  return p;
}

inline double max_abs_diff(const Mat3& a, const Mat3& b) {
  double m = 0;
  for (std::size_t i = 0; i < 9; ++i) m = std::max(m, std::abs(a.m[i] - b.m[i]));
  return m;
}

inline ImagePlanarF random_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImagePlanarF img(w, h);
  for (auto& p : img.planes) {
    for (double& v : p) v = u(rng);
  }
  return img;
}

inline ImageU8 random_image_u8(std::mt19937_64& rng, std::size_t w, std::size_t h) {
  std::uniform_int_distribution<int> u(0, 255);
  ImageU8 img(w, h);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(u(rng));
  return img;
}

/// Smooth synthetic "photo": a warm diagonal gradient with mild noise.
inline ImagePlanarF synthetic_warm(std::size_t w, std::size_t h, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.03);
  ImagePlanarF img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double s = (static_cast<double>(x) + static_cast<double>(y)) / static_cast<double>(w + h);
      const double t = static_cast<double>(y) / static_cast<double>(h);
      const std::size_t i = y * w + x;
      img.planes[0][i] = std::clamp(0.35 + 0.45 * s + noise(rng), 0.0, 1.0);
      img.planes[1][i] = std::clamp(0.30 + 0.25 * s + 0.1 * t + noise(rng), 0.0, 1.0);
      img.planes[2][i] = std::clamp(0.15 + 0.15 * t + noise(rng), 0.0, 1.0);
    }
  }
  return img;
}

/// Synthetic "painting": cool blue stripes with strong texture.
inline ImagePlanarF synthetic_cool(std::size_t w, std::size_t h, std::uint64_t seed = 2) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.05);
  ImagePlanarF img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double stripe = 0.5 + 0.5 * std::sin(0.2 * static_cast<double>(x) + 0.05 * static_cast<double>(y));
      const std::size_t i = y * w + x;
      img.planes[0][i] = std::clamp(0.10 + 0.20 * stripe + noise(rng), 0.0, 1.0);
      img.planes[1][i] = std::clamp(0.25 + 0.30 * stripe + noise(rng), 0.0, 1.0);
      img.planes[2][i] = std::clamp(0.45 + 0.40 * stripe + noise(rng), 0.0, 1.0);
    }
  }
  return img;
}

// -- oracles ----------------------------------------------------------------

struct NaiveStats {
  double mean[3];
  double cov[3][3];
};

/// Direct population mean/covariance by summing outer products, using
/// long double accumulators in plain pixel order.
inline NaiveStats naive_stats(const ImagePlanarF& img) {
  const std::size_t n = img.pixel_count();
  NaiveStats s{};
  long double sum[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) sum[c] += img.planes[c][i];
  }
  for (std::size_t c = 0; c < 3; ++c) s.mean[c] = static_cast<double>(sum[c] / n);
  long double acc[3][3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) {
        acc[r][c] += (img.planes[r][i] - static_cast<long double>(s.mean[r])) *
                     (img.planes[c][i] - static_cast<long double>(s.mean[c]));
      }
    }
  }
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) s.cov[r][c] = static_cast<double>(acc[r][c] / n);
  }
  return s;
}

/// Independent P6 writer: the Netpbm header followed by the raw samples.
inline std::vector<std::uint8_t> reference_ppm(std::size_t w, std::size_t h,
                                               std::span<const std::uint8_t> samples) {
  std::vector<std::uint8_t> out;
  const char magic[] = {'P', '6', '\n'};
  out.insert(out.end(), magic, magic + 3);
  for (char ch : std::to_string(w)) out.push_back(static_cast<std::uint8_t>(ch));
  out.push_back(' ');
  for (char ch : std::to_string(h)) out.push_back(static_cast<std::uint8_t>(ch));
  out.push_back('\n');
  for (char ch : {'2', '5', '5', '\n'}) out.push_back(static_cast<std::uint8_t>(ch));
  out.insert(out.end(), samples.begin(), samples.end());
  return out;
}

}  // namespace colorkeep::testing
