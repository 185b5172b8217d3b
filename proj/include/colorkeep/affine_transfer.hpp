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

// Affine color maps x -> A x + b that carry the mean and covariance of a
// source image onto those of a target image:
//
//   b = mu_t - A mu_s,   A Sigma_s A^T = Sigma_t.
//
// Three members of that family are provided:
//   cholesky         A = L_t L_s^{-1}                      (channel-order dependent)
//   image_analogies  A = Sigma_t^{1/2} Sigma_s^{-1/2}
//   mkl              A = Sigma_s^{-1/2} (Sigma_s^{1/2} Sigma_t Sigma_s^{1/2})^{1/2} Sigma_s^{-1/2}
//
// The last one is the Monge-Kantorovich map: among all maps satisfying the
// constraints it has the smallest expected squared pixel displacement.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "colorkeep/colorstats.hpp"
#include "colorkeep/error.hpp"
#include "colorkeep/image.hpp"
#include "colorkeep/linalg3.hpp"
#include "colorkeep/parallel.hpp"

namespace colorkeep {

enum class Variant { cholesky, image_analogies, mkl };

constexpr std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::cholesky: return "cholesky";
    case Variant::image_analogies: return "image_analogies";
    case Variant::mkl: return "mkl";
  }
  return "unknown";
}

enum class Clamp { on, off };

struct AffineColorMap {
  Mat3 a = Mat3::identity();
  Vec3 b;
  Variant variant = Variant::image_analogies;
  // Diagonal loading that was added to each covariance before factoring.
  double source_regularization = 0;
  double target_regularization = 0;
};

struct ConstraintResiduals {
  double mean_residual = 0;  // |A mu_s + b - mu_t|
  double cov_residual = 0;   // |A S_s A^T - S_t|_F on the regularized covariances
};

/// Default diagonal loading for a covariance: 1e-8 * trace / 3.
inline double default_regularization(const SymMat3& cov) { return 1e-8 * trace(cov) / 3.0; }

/// Solves for the map from `source` statistics to `target` statistics.
///
/// Both covariances are loaded with `eps` on the diagonal, or with
/// default_regularization() of each when `eps` is not given. A covariance
/// that is still singular after loading raises Errc::degenerate_stats.
inline AffineColorMap solve_affine_map(const ColorStats& source, const ColorStats& target,
                                       Variant variant, std::optional<double> eps = std::nullopt) {
  if (eps && !(*eps >= 0.0 && std::isfinite(*eps))) {
    throw Error(Errc::numeric, "solve_affine_map: regularization must be finite and >= 0");
  }
  if (!is_finite(source.cov) || !is_finite(target.cov) || !is_finite(source.mean) ||
      !is_finite(target.mean)) {
    throw Error(Errc::numeric, "solve_affine_map: non-finite statistics");
  }
  AffineColorMap map;
  map.variant = variant;
  map.source_regularization = eps ? *eps : default_regularization(source.cov);
  map.target_regularization = eps ? *eps : default_regularization(target.cov);
  const SymMat3 cov_s = add_diagonal(source.cov, map.source_regularization);
  const SymMat3 cov_t = add_diagonal(target.cov, map.target_regularization);

  try {
    switch (variant) {
      case Variant::cholesky:
        map.a = solve_right_lower(cholesky(cov_t), cholesky(cov_s));
        break;
      case Variant::image_analogies:
        map.a = sym_sqrt(cov_t).full() * sym_inv_sqrt(cov_s).full();
        break;
      case Variant::mkl: {
        const Mat3 root_s = sym_sqrt(cov_s).full();
        const Mat3 inv_root_s = sym_inv_sqrt(cov_s).full();
        const SymMat3 middle = SymMat3::symmetrize(root_s * cov_t.full() * root_s);
        map.a = inv_root_s * sym_sqrt(middle).full() * inv_root_s;
        break;
      }
    }
  } catch (const Error& e) {
    if (e.code() == Errc::numeric) throw;
    throw Error(Errc::degenerate_stats,
                std::string("solve_affine_map (") + std::string(to_string(variant)) +
                    "): covariance is degenerate: " + e.what());
  }
  if (!is_finite(map.a)) {
    throw Error(Errc::degenerate_stats, "solve_affine_map: map is not finite");
  }
  map.b = target.mean - map.a * source.mean;
  return map;
}

/// Applies x -> A x + b to every pixel, optionally clamping to [0, 1].
inline ImagePlanarF apply_affine_map(const ImagePlanarF& img, const AffineColorMap& map,
                                     Clamp clamp = Clamp::on, Exec exec = {}) {
  if (!is_finite(map.a) || !is_finite(map.b)) {
    throw Error(Errc::numeric, "apply_affine_map: map has non-finite entries");
  }
  const std::size_t n = img.pixel_count();
  for (const auto& p : img.planes) {
    if (p.size() != n) throw Error(Errc::dimension, "apply_affine_map: plane size mismatch");
  }
  ImagePlanarF out(img.width, img.height);
  const Mat3& a = map.a;
  const Vec3& b = map.b;
  for_each_block(n, exec, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double x0 = img.planes[0][i], x1 = img.planes[1][i], x2 = img.planes[2][i];
      for (std::size_t c = 0; c < 3; ++c) {
        double v = a(c, 0) * x0 + a(c, 1) * x1 + a(c, 2) * x2 + b[c];
        if (clamp == Clamp::on) v = std::clamp(v, 0.0, 1.0);
        out.planes[c][i] = v;
      }
    }
  });
  return out;
}

inline ConstraintResiduals verify_constraint(const AffineColorMap& map, const ColorStats& source,
                                             const ColorStats& target) {
  const Mat3 cov_s = add_diagonal(source.cov, map.source_regularization).full();
  const Mat3 cov_t = add_diagonal(target.cov, map.target_regularization).full();
  return {norm(map.a * source.mean + map.b - target.mean),
          frobenius_norm(map.a * cov_s * map.a.transposed() - cov_t)};
}

/// E|(A - I)x + b|^2 for x ~ N(mu_s, Sigma_s): the expected squared
/// displacement of a pixel under the map.
inline double transport_cost(const AffineColorMap& map, const ColorStats& source) {
  const Mat3 d = map.a - Mat3::identity();
  const Vec3 shift = d * source.mean + map.b;
  return dot(shift, shift) + trace(d * source.cov.full() * d.transposed());
}

}  // namespace colorkeep
