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

#include <cmath>
#include <random>
#include <vector>

#include "colorkeep/colorstats.hpp"
#include "test_support.hpp"

namespace colorkeep {
namespace {

ImagePlanarF from_pixels(const std::vector<Vec3>& px) {
  ImagePlanarF img(px.size(), 1);
  for (std::size_t i = 0; i < px.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) img.planes[c][i] = px[i][c];
  }
  return img;
}

void expect_matches_oracle(const ColorStats& s, const ImagePlanarF& img, double tol) {
  const auto o = testing::naive_stats(img);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_NEAR(s.mean[r], o.mean[r], tol);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(s.cov(r, c), o.cov[r][c], tol);
  }
}

TEST(ColorStats, SolidImage) {
  const ColorStats s = compute_color_stats(from_pixels(std::vector<Vec3>(10, Vec3{{0.5, 0.5, 0.5}})));
  EXPECT_EQ(s.mean, (Vec3{{0.5, 0.5, 0.5}}));
  EXPECT_EQ(s.cov, SymMat3{});
  EXPECT_EQ(s.n, 10u);
}

TEST(ColorStats, TwoPixels) {
  const ImagePlanarF img = from_pixels({Vec3{{0, 0, 0}}, Vec3{{1, 1, 1}}});
  const auto o = testing::naive_stats(img);
  ASSERT_EQ(o.cov[0][1], 0.25);
  const ColorStats s = compute_color_stats(img);
  EXPECT_EQ(s.mean, (Vec3{{0.5, 0.5, 0.5}}));
  for (double v : s.cov.u) EXPECT_EQ(v, 0.25);
}

TEST(ColorStats, OnlyRedVaries) {
  const double g = 0.3, b = 0.8;
  const ImagePlanarF img =
      from_pixels({Vec3{{0, g, b}}, Vec3{{1, g, b}}, Vec3{{0, g, b}}, Vec3{{1, g, b}}});
  const auto o = testing::naive_stats(img);
  const ColorStats s = compute_color_stats(img);
  EXPECT_EQ(s.cov(0, 0), o.cov[0][0]);
  EXPECT_EQ(s.cov(0, 0), 0.25);
  for (std::size_t i = 1; i < 6; ++i) EXPECT_EQ(s.cov.u[i], 0.0);
}

TEST(ColorStats, MatchesNaiveSummationOnLargeImages) {
  std::mt19937_64 rng(21);
  for (auto [w, h] : {std::pair{1, 1}, std::pair{7, 3}, std::pair{100, 41}, std::pair{300, 200}}) {
    const ImagePlanarF img = testing::random_image(rng, w, h);
    expect_matches_oracle(compute_color_stats(img), img, 1e-14);
  }
}

TEST(ColorStats, EmptyImageIsAnError) {
  try {
    compute_color_stats(ImagePlanarF{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_image);
  }
}

TEST(ColorStats, ShiftScaleAndPermutation) {
  std::mt19937_64 rng(22);
  ImagePlanarF img = testing::random_image(rng, 64, 48);
  for (auto& p : img.planes) {
    for (double& v : p) v = 0.2 + 0.5 * v;  // leave room for a shift
  }
  const ColorStats base = compute_color_stats(img);

  ImagePlanarF shifted = img;
  for (auto& p : shifted.planes) {
    for (double& v : p) v += 0.1;
  }
  const ColorStats sh = compute_color_stats(shifted);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(sh.cov.u[i], base.cov.u[i], 1e-12);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(sh.mean[c], base.mean[c] + 0.1, 1e-12);

  ImagePlanarF scaled = img;
  for (auto& p : scaled.planes) {
    for (double& v : p) v *= 1.25;
  }
  const ColorStats sc = compute_color_stats(scaled);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(sc.cov.u[i], 1.5625 * base.cov.u[i], 1e-12);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(sc.mean[c], 1.25 * base.mean[c], 1e-12);

  // BGR ordering: mean P mu, covariance P Sigma P^T, exactly.
  ImagePlanarF bgr = img;
  std::swap(bgr.planes[0], bgr.planes[2]);
  const ColorStats p = compute_color_stats(bgr);
  const Mat3 perm = testing::permutation(2, 1, 0);
  EXPECT_EQ(p.mean, perm * base.mean);
  EXPECT_EQ(p.cov.full(), perm * base.cov.full() * perm.transposed());
}

TEST(ColorStats, IndependentOfThreadCount) {
  std::mt19937_64 rng(23);
  const ImagePlanarF img = testing::random_image(rng, 333, 129);
  const ColorStats one = compute_color_stats(img, Exec{1});
  for (unsigned t : {2u, 3u, 8u, 16u}) {
    const ColorStats many = compute_color_stats(img, Exec{t});
    EXPECT_EQ(many.mean, one.mean);
    EXPECT_EQ(many.cov, one.cov);
  }
}

TEST(ScalarStats, Examples) {
  const std::vector<double> constant(9, 0.3);
  const ScalarStats c = compute_scalar_stats(constant);
  EXPECT_DOUBLE_EQ(c.mean, 0.3);
  EXPECT_NEAR(c.std, 0.0, 1e-16);

  const std::vector<double> two{0, 1};
  EXPECT_EQ(compute_scalar_stats(two).mean, 0.5);
  EXPECT_EQ(compute_scalar_stats(two).std, 0.5);

  // Oracle: deviations (-0.2, 0, 0.2) -> variance 0.08 / 3 = 2/75.
  const std::vector<double> three{0.2, 0.4, 0.6};
  const ScalarStats t = compute_scalar_stats(three);
  EXPECT_NEAR(t.mean, 0.4, 1e-15);
  EXPECT_NEAR(t.std, std::sqrt(2.0 / 75.0), 1e-15);

  EXPECT_THROW(compute_scalar_stats(std::vector<double>{}), Error);
}

TEST(ScalarStats, IndependentOfThreadCount) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> plane(50001);
  for (double& v : plane) v = u(rng);
  const ScalarStats one = compute_scalar_stats(plane, Exec{1});
  const ScalarStats eight = compute_scalar_stats(plane, Exec{8});
  EXPECT_EQ(one.mean, eight.mean);
  EXPECT_EQ(one.std, eight.std);
}

}  // namespace
}  // namespace colorkeep
