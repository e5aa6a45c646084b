#pragma once

// Fixed-dimension vectors and matrices for the 2D and 3D derivative formulas.

#include <array>
#include <cmath>
#include <cstddef>

namespace vrc {

template <int N>
struct Vec {
  static_assert(N == 2 || N == 3, "only 2D and 3D are supported");
  std::array<double, N> c{};

  constexpr Vec() = default;
  constexpr Vec(double x, double y) requires(N == 2) : c{x, y} {}
  constexpr Vec(double x, double y, double z) requires(N == 3) : c{x, y, z} {}

  static constexpr Vec filled(double v) {
    Vec r;
    r.c.fill(v);
    return r;
  }
  static constexpr Vec axis(int i) {
    Vec r;
    r.c[i] = 1.0;
    return r;
  }

  constexpr double& operator[](int i) { return c[i]; }
  constexpr double operator[](int i) const { return c[i]; }

  constexpr Vec& operator+=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Vec& operator-=(const Vec& o) {
    for (int i = 0; i < N; ++i) c[i] -= o.c[i];
    return *this;
  }
  constexpr Vec& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  constexpr Vec& operator/=(double s) { return *this *= (1.0 / s); }

  friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend constexpr Vec operator-(Vec a) { return a *= -1.0; }
  friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
  friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
  friend constexpr Vec operator/(Vec a, double s) { return a /= s; }
  friend constexpr bool operator==(const Vec&, const Vec&) = default;
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <int N>
double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <int N>
Vec<N> normalized(const Vec<N>& a) {
  return a / norm(a);
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// z-component of the 2D cross product.
constexpr double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

template <int N>
struct Mat {
  std::array<std::array<double, N>, N> m{};

  static constexpr Mat zero() { return Mat{}; }
  static constexpr Mat identity() {
    Mat r;
    for (int i = 0; i < N; ++i) r.m[i][i] = 1.0;
    return r;
  }
  static constexpr Mat diagonal(const Vec<N>& d) {
    Mat r;
    for (int i = 0; i < N; ++i) r.m[i][i] = d[i];
    return r;
  }

  constexpr double& operator()(int i, int j) { return m[i][j]; }
  constexpr double operator()(int i, int j) const { return m[i][j]; }

  constexpr Mat& operator+=(const Mat& o) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m[i][j] += o.m[i][j];
    return *this;
  }
  constexpr Mat& operator-=(const Mat& o) {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) m[i][j] -= o.m[i][j];
    return *this;
  }
  constexpr Mat& operator*=(double s) {
    for (auto& row : m)
      for (auto& v : row) v *= s;
    return *this;
  }

  friend constexpr Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend constexpr Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend constexpr Mat operator-(Mat a) { return a *= -1.0; }
  friend constexpr Mat operator*(Mat a, double s) { return a *= s; }
  friend constexpr Mat operator*(double s, Mat a) { return a *= s; }
  friend constexpr Mat operator/(Mat a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Mat&, const Mat&) = default;

  friend constexpr Vec<N> operator*(const Mat& a, const Vec<N>& v) {
    Vec<N> r;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) r[i] += a.m[i][j] * v[j];
    return r;
  }
  friend constexpr Mat operator*(const Mat& a, const Mat& b) {
    Mat r;
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k)
        for (int j = 0; j < N; ++j) r.m[i][j] += a.m[i][k] * b.m[k][j];
    return r;
  }
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

template <int N>
constexpr Mat<N> transpose(const Mat<N>& a) {
  Mat<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r(i, j) = a(j, i);
  return r;
}

template <int N>
constexpr double trace(const Mat<N>& a) {
  double s = 0.0;
  for (int i = 0; i < N; ++i) s += a(i, i);
  return s;
}

template <int N>
double frobenius_norm(const Mat<N>& a) {
  double s = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

template <int N>
constexpr Mat<N> outer(const Vec<N>& u, const Vec<N>& v) {
  Mat<N> r;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) r(i, j) = u[i] * v[j];
  return r;
}

template <int N>
constexpr Mat<N> symmetrized(const Mat<N>& a) {
  return (a + transpose(a)) * 0.5;
}

// ||A - A^T||_F / ||A||_F, zero for the zero matrix.
template <int N>
double relative_asymmetry(const Mat<N>& a) {
  const double scale = frobenius_norm(a);
  if (scale == 0.0) return 0.0;
  return frobenius_norm(a - transpose(a)) / scale;
}

// <v>, the matrix with <v> u = v x u.
constexpr Mat3 cross_matrix(const Vec3& v) {
  Mat3 r;
  r(0, 1) = -v[2];
  r(0, 2) = v[1];
  r(1, 0) = v[2];
  r(1, 2) = -v[0];
  r(2, 0) = -v[1];
  r(2, 1) = v[0];
  return r;
}

template <int N>
struct EigenSystem {
  // Sorted by descending absolute value.
  std::array<double, N> values{};
  std::array<Vec<N>, N> vectors{};
};

inline constexpr double kSymmetryTolerance = 1e-7;

// Eigendecomposition of a symmetric matrix. Throws std::invalid_argument when
// the relative asymmetry exceeds kSymmetryTolerance.
template <int N>
EigenSystem<N> eigen_sym(const Mat<N>& m);

template <int N>
Mat<N> reconstruct(const EigenSystem<N>& es) {
  Mat<N> r;
  for (int i = 0; i < N; ++i) r += outer(es.vectors[i], es.vectors[i]) * es.values[i];
  return r;
}

}  // namespace vrc
