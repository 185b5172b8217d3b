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

// Fixed-size 3-vector / 3x3 matrix kernels used by the color statistics and
// the affine solvers. Everything is double precision and allocation free.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>

#include "colorkeep/error.hpp"

namespace colorkeep {

struct Vec3 {
  std::array<double, 3> c{};

  constexpr double& operator[](std::size_t i) { return c[i]; }
  constexpr double operator[](std::size_t i) const { return c[i]; }

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}};
  }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}};
  }
  friend constexpr Vec3 operator*(double s, const Vec3& a) {
    return {{s * a[0], s * a[1], s * a[2]}};
  }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{};

  constexpr double& operator()(std::size_t r, std::size_t col) { return m[3 * r + col]; }
  constexpr double operator()(std::size_t r, std::size_t col) const { return m[3 * r + col]; }

  static constexpr Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
  static constexpr Mat3 diagonal(const Vec3& d) {
    return {{d[0], 0, 0, 0, d[1], 0, 0, 0, d[2]}};
  }

  constexpr Mat3 transposed() const {
    return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      out(r, c) = a(r, 0) * b(0, c) + a(r, 1) * b(1, c) + a(r, 2) * b(2, c);
    }
  }
  return out;
}

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {{a(0, 0) * v[0] + a(0, 1) * v[1] + a(0, 2) * v[2],
           a(1, 0) * v[0] + a(1, 1) * v[1] + a(1, 2) * v[2],
           a(2, 0) * v[0] + a(2, 1) * v[1] + a(2, 2) * v[2]}};
}

inline Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (std::size_t i = 0; i < 9; ++i) out.m[i] = a.m[i] + b.m[i];
  return out;
}

inline Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 out;
  for (std::size_t i = 0; i < 9; ++i) out.m[i] = a.m[i] - b.m[i];
  return out;
}

inline Mat3 operator*(double s, const Mat3& a) {
  Mat3 out;
  for (std::size_t i = 0; i < 9; ++i) out.m[i] = s * a.m[i];
  return out;
}

inline double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

inline double frobenius_norm(const Mat3& a) {
  double s = 0;
  for (double v : a.m) s += v * v;
  return std::sqrt(s);
}

inline bool is_finite(const Mat3& a) {
  return std::all_of(a.m.begin(), a.m.end(), [](double v) { return std::isfinite(v); });
}

inline double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Adjugate inverse. Throws Errc::singular when the determinant is zero.
inline Mat3 inverse(const Mat3& a) {
  const double det = determinant(a);
  if (det == 0.0 || !std::isfinite(det)) {
    throw Error(Errc::singular, "matrix is singular");
  }
  Mat3 adj;
  adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
  adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
  adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
  adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
  adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
  adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
  adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
  adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
  adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  return (1.0 / det) * adj;
}

/// Symmetric 3x3 matrix stored as its upper triangle (xx, xy, xz, yy, yz, zz).
struct SymMat3 {
  std::array<double, 6> u{};

  static constexpr std::size_t index(std::size_t r, std::size_t c) {
    if (r > c) std::swap(r, c);
    // row 0: 0 1 2, row 1: 3 4, row 2: 5
    return r == 0 ? c : (r == 1 ? 2 + c : 5);
  }

  constexpr double operator()(std::size_t r, std::size_t c) const { return u[index(r, c)]; }
  constexpr double& operator()(std::size_t r, std::size_t c) { return u[index(r, c)]; }

  static constexpr SymMat3 identity() { return {{1, 0, 0, 1, 0, 1}}; }
  static constexpr SymMat3 diagonal(const Vec3& d) { return {{d[0], 0, 0, d[1], 0, d[2]}}; }

  /// Symmetric part (M + M^T) / 2 of a general matrix.
  static SymMat3 symmetrize(const Mat3& a) {
    SymMat3 s;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = r; c < 3; ++c) s(r, c) = 0.5 * (a(r, c) + a(c, r));
    }
    return s;
  }

  Mat3 full() const {
    Mat3 a;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) a(r, c) = (*this)(r, c);
    }
    return a;
  }

  friend constexpr bool operator==(const SymMat3&, const SymMat3&) = default;
};

inline double trace(const SymMat3& s) { return s.u[0] + s.u[3] + s.u[5]; }

inline SymMat3 add_diagonal(SymMat3 s, double eps) {
  s.u[0] += eps;
  s.u[3] += eps;
  s.u[5] += eps;
  return s;
}

inline bool is_finite(const SymMat3& s) {
  return std::all_of(s.u.begin(), s.u.end(), [](double v) { return std::isfinite(v); });
}

/// Lower-triangular factor L of m + eps*I with L L^T = m + eps*I.
inline Mat3 cholesky(const SymMat3& m, double eps = 0.0) {
  const SymMat3 a = add_diagonal(m, eps);
  if (!is_finite(a)) throw Error(Errc::numeric, "cholesky: non-finite input");
  Mat3 l;
  for (std::size_t j = 0; j < 3; ++j) {
    double pivot = a(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > 0.0)) {
      throw Error(Errc::not_positive_definite,
                  "cholesky: pivot " + std::to_string(j) + " is not positive");
    }
    l(j, j) = std::sqrt(pivot);
    for (std::size_t i = j + 1; i < 3; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

/// Solves X * L = B for X, with L lower triangular (X = B L^{-1}).
inline Mat3 solve_right_lower(const Mat3& b, const Mat3& l) {
  Mat3 x;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t jj = 3; jj-- > 0;) {
      double v = b(r, jj);
      for (std::size_t k = jj + 1; k < 3; ++k) v -= x(r, k) * l(k, jj);
      x(r, jj) = v / l(jj, jj);
    }
  }
  return x;
}

inline constexpr int kJacobiMaxSweeps = 50;
inline constexpr double kJacobiTolerance = 1e-14;

struct EigenDecomposition {
  Vec3 values;   // descending
  Mat3 vectors;  // column k is the eigenvector of values[k]
  int sweeps = 0;
  bool converged = false;
};

/// Cyclic Jacobi eigensolver. Eigenvalues are sorted descending and each
/// eigenvector is oriented so that its first non-negligible component is
/// positive, which makes the result a deterministic function of the input.
inline EigenDecomposition eig_sym(const SymMat3& s) {
  Mat3 a = s.full();
  Mat3 v = Mat3::identity();
  const double tol = kJacobiTolerance * frobenius_norm(a);
  auto off_norm = [&a] {
    return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
  };

  EigenDecomposition out;
  while (!(off_norm() <= tol) && out.sweeps < kJacobiMaxSweeps) {
    ++out.sweeps;
    for (std::size_t p = 0; p < 2; ++p) {
      for (std::size_t q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < 3; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < 3; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  out.converged = off_norm() <= tol;

  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&a](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t r = 0; r < 3; ++r) {
      if (std::abs(v(r, src)) > 1e-12) {
        sign = v(r, src) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < 3; ++r) out.vectors(r, k) = sign * v(r, src);
  }
  return out;
}

/// U diag(f(lambda)) U^T, symmetrized.
template <typename Fn>
SymMat3 spectral_map(const EigenDecomposition& e, Fn&& f) {
  SymMat3 out;
  Vec3 fl{{f(e.values[0]), f(e.values[1]), f(e.values[2])}};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = r; c < 3; ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < 3; ++k) acc += e.vectors(r, k) * fl[k] * e.vectors(c, k);
      out(r, c) = acc;
    }
  }
  return out;
}

/// Relative tolerance below which negative eigenvalues count as rounding
/// noise of a PSD matrix and are clamped to zero.
inline constexpr double kPsdTolerance = 1e-10;

namespace detail {

inline Vec3 psd_eigenvalues(const EigenDecomposition& e, double tr, const char* who) {
  Vec3 lam = e.values;
  for (std::size_t k = 0; k < 3; ++k) {
    if (lam[k] < 0.0) {
      if (lam[k] < -kPsdTolerance * tr) {
        throw Error(Errc::not_psd, std::string(who) + ": matrix has a negative eigenvalue " +
                                       std::to_string(lam[k]));
      }
      lam[k] = 0.0;
    }
  }
  return lam;
}

}  // namespace detail

/// Principal square root U Lambda^{1/2} U^T of a PSD matrix.
inline SymMat3 sym_sqrt(const SymMat3& m) {
  if (!is_finite(m)) throw Error(Errc::numeric, "sym_sqrt: non-finite input");
  EigenDecomposition e = eig_sym(m);
  e.values = detail::psd_eigenvalues(e, trace(m), "sym_sqrt");
  return spectral_map(e, [](double l) { return std::sqrt(l); });
}

/// Inverse principal square root. Eigenvalues are floored at
/// eps * trace(m) / 3 before inversion.
inline SymMat3 sym_inv_sqrt(const SymMat3& m, double eps = 0.0) {
  if (!is_finite(m)) throw Error(Errc::numeric, "sym_inv_sqrt: non-finite input");
  EigenDecomposition e = eig_sym(m);
  const double tr = trace(m);
  e.values = detail::psd_eigenvalues(e, tr, "sym_inv_sqrt");
  const double floor = eps * tr / 3.0;
  for (std::size_t k = 0; k < 3; ++k) {
    e.values[k] = std::max(e.values[k], floor);
    if (!(e.values[k] > 0.0)) {
      throw Error(Errc::singular, "sym_inv_sqrt: matrix is singular");
    }
  }
  return spectral_map(e, [](double l) { return 1.0 / std::sqrt(l); });
}

}  // namespace colorkeep
