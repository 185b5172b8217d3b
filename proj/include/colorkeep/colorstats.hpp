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

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"
#include "colorkeep/linalg3.hpp"
#include "colorkeep/parallel.hpp"

namespace colorkeep {

/// Population mean and covariance (normalized by N) of the pixel colors.
struct ColorStats {
  Vec3 mean;
  SymMat3 cov;
  std::size_t n = 0;
};

struct ScalarStats {
  double mean = 0;
  double std = 0;
};

namespace detail {

inline SymMat3 add_sym(const SymMat3& a, const SymMat3& b) {
  SymMat3 out;
  for (std::size_t i = 0; i < 6; ++i) out.u[i] = a.u[i] + b.u[i];
  return out;
}

}  // namespace detail

// Two passes: block sums for the mean, then block sums of centered outer
// products. Both are combined with tree_reduce over a block partition that
// does not depend on the thread count.
inline ColorStats compute_color_stats(const ImagePlanarF& img, Exec exec = {}) {
  const std::size_t n = img.pixel_count();
  if (n == 0) throw Error(Errc::empty_image, "compute_color_stats: image has no pixels");
  for (const auto& p : img.planes) {
    if (p.size() != n) throw Error(Errc::dimension, "compute_color_stats: plane size mismatch");
  }
  const auto& [r, g, b] = img.planes;
  const std::size_t blocks = block_count(n);

  std::vector<Vec3> sums(blocks);
  for_each_block(n, exec, [&](std::size_t blk, std::size_t begin, std::size_t end) {
    Vec3 s;
    for (std::size_t i = begin; i < end; ++i) {
      s[0] += r[i];
      s[1] += g[i];
      s[2] += b[i];
    }
    sums[blk] = s;
  });
  const Vec3 total = tree_reduce(sums, 0, blocks, [](const Vec3& x, const Vec3& y) { return x + y; });
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vec3 mean = inv_n * total;

  std::vector<SymMat3> moments(blocks);
  for_each_block(n, exec, [&](std::size_t blk, std::size_t begin, std::size_t end) {
    SymMat3 s;
    for (std::size_t i = begin; i < end; ++i) {
      const double dr = r[i] - mean[0], dg = g[i] - mean[1], db = b[i] - mean[2];
      s.u[0] += dr * dr;
      s.u[1] += dr * dg;
      s.u[2] += dr * db;
      s.u[3] += dg * dg;
      s.u[4] += dg * db;
      s.u[5] += db * db;
    }
    moments[blk] = s;
  });
  SymMat3 cov = tree_reduce(moments, 0, blocks, detail::add_sym);
  for (double& v : cov.u) v *= inv_n;

  return {mean, cov, n};
}

inline ScalarStats compute_scalar_stats(std::span<const double> plane, Exec exec = {}) {
  const std::size_t n = plane.size();
  if (n == 0) throw Error(Errc::empty_image, "compute_scalar_stats: plane is empty");
  const std::size_t blocks = block_count(n);
  auto plus = [](double x, double y) { return x + y; };

  std::vector<double> parts(blocks);
  for_each_block(n, exec, [&](std::size_t blk, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) s += plane[i];
    parts[blk] = s;
  });
  const double mean = tree_reduce(parts, 0, blocks, plus) / static_cast<double>(n);

  for_each_block(n, exec, [&](std::size_t blk, std::size_t begin, std::size_t end) {
    double s = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = plane[i] - mean;
      s += d * d;
    }
    parts[blk] = s;
  });
  const double var = tree_reduce(parts, 0, blocks, plus) / static_cast<double>(n);
  return {mean, std::sqrt(var)};
}

}  // namespace colorkeep
