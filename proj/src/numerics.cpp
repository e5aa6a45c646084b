#include "vrc/numerics.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace vrc {
namespace {

template <int N>
void check_symmetric(const Mat<N>& m) {
  if (relative_asymmetry(m) > kSymmetryTolerance)
    throw std::invalid_argument("eigen_sym: matrix is not symmetric");
}

template <int N>
void sort_by_magnitude(EigenSystem<N>& es) {
  std::array<int, N> order;
  for (int i = 0; i < N; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(es.values[a]) > std::abs(es.values[b]);
  });
  EigenSystem<N> sorted;
  for (int i = 0; i < N; ++i) {
    sorted.values[i] = es.values[order[i]];
    sorted.vectors[i] = es.vectors[order[i]];
  }
  es = sorted;
}

// Cyclic Jacobi rotations; used when the closed form is ill-conditioned.
EigenSystem<3> jacobi_eigen(const Mat3& input) {
  Mat3 a = input;
  Mat3 v = Mat3::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    const double diag = a(0, 0) * a(0, 0) + a(1, 1) * a(1, 1) + a(2, 2) * a(2, 2);
    if (off <= 1e-34 * diag || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 rot = Mat3::identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = transpose(rot) * a * rot;
        a(p, q) = a(q, p) = 0.0;
        v = v * rot;
      }
    }
  }
  EigenSystem<3> es;
  for (int i = 0; i < 3; ++i) {
    es.values[i] = a(i, i);
    es.vectors[i] = Vec3{v(0, i), v(1, i), v(2, i)};
  }
  return es;
}

// Null vector of (m - lambda I) from the best-conditioned cross product of its rows.
bool null_vector(const Mat3& m, double lambda, Vec3& out) {
  const Vec3 r0{m(0, 0) - lambda, m(0, 1), m(0, 2)};
  const Vec3 r1{m(1, 0), m(1, 1) - lambda, m(1, 2)};
  const Vec3 r2{m(2, 0), m(2, 1), m(2, 2) - lambda};
  const Vec3 candidates[3] = {cross(r0, r1), cross(r0, r2), cross(r1, r2)};
  int best = 0;
  double best_norm = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double n = dot(candidates[i], candidates[i]);
    if (n > best_norm) {
      best_norm = n;
      best = i;
    }
  }
  const double scale = std::max({dot(r0, r0), dot(r1, r1), dot(r2, r2)});
  if (best_norm <= 1e-20 * scale * scale || best_norm == 0.0) return false;
  out = candidates[best] / std::sqrt(best_norm);
  return true;
}

EigenSystem<3> analytic_eigen(const Mat3& m, bool& ok) {
  ok = false;
  EigenSystem<3> es;
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  const double q = trace(m) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  if (p2 == 0.0) {
    // Multiple of the identity.
    for (int i = 0; i < 3; ++i) {
      es.values[i] = q;
      es.vectors[i] = Vec3::axis(i);
    }
    ok = true;
    return es;
  }
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 b = (m - Mat3::identity() * q) / p;
  const double det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
                       b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
                       b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  const double r = std::clamp(det_b / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double l0 = q + 2.0 * p * std::cos(phi);
  const double l2 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  const double l1 = 3.0 * q - l0 - l2;

  // Near-degenerate spectra make the row cross products unreliable.
  const double gap = std::min({std::abs(l0 - l1), std::abs(l1 - l2), std::abs(l0 - l2)});
  if (gap <= 1e-6 * p) return es;

  Vec3 v0, v1;
  if (!null_vector(m, l0, v0) || !null_vector(m, l1, v1)) return es;
  v1 = normalized(v1 - v0 * dot(v0, v1));
  const Vec3 v2 = cross(v0, v1);
  es.values = {l0, l1, l2};
  es.vectors = {v0, v1, v2};

  const double scale = frobenius_norm(m);
  if (frobenius_norm(reconstruct(es) - m) > 1e-9 * scale) return es;
  ok = true;
  return es;
}

}  // namespace

template <>
EigenSystem<2> eigen_sym<2>(const Mat2& m) {
  check_symmetric(m);
  const double a = m(0, 0);
  const double b = 0.5 * (m(0, 1) + m(1, 0));
  const double d = m(1, 1);
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  const double theta = 0.5 * std::atan2(2.0 * b, a - d);
  EigenSystem<2> es;
  es.values = {mean + radius, mean - radius};
  es.vectors = {Vec2{std::cos(theta), std::sin(theta)}, Vec2{-std::sin(theta), std::cos(theta)}};
  sort_by_magnitude(es);
  return es;
}

template <>
EigenSystem<3> eigen_sym<3>(const Mat3& m) {
  check_symmetric(m);
  const Mat3 sym = symmetrized(m);
  bool ok = false;
  EigenSystem<3> es = analytic_eigen(sym, ok);
  if (!ok) es = jacobi_eigen(sym);
  sort_by_magnitude(es);
  return es;
}

}  // namespace vrc
