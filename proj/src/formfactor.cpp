#include "vrc/formfactor.hpp"

#include <cmath>
#include <numbers>

namespace vrc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <int N>
bool finalize_hessian(Mat<N>& h) {
  if (relative_asymmetry(h) > kSymmetryTolerance) return false;
  h = symmetrized(h);
  return true;
}

}  // namespace

double ff_segment_value(const Vec2& x, const Vec2& y0, const Vec2& y1) {
  const Vec2 a = y0 - x;
  const Vec2 b = y1 - x;
  return std::atan2(std::abs(cross(a, b)), dot(a, b)) / kTwoPi;
}

std::optional<FormFactorDerivs<2>> try_ff_segment_derivs(const Vec2& x, const Vec2& y0, const Vec2& y1) {
  const Vec2 a = y0 - x;  // x -> y0
  const Vec2 b = y1 - x;  // x -> y1
  const double r0 = norm(a);
  const double r1 = norm(b);
  if (!(r0 > 0.0) || !(r1 > 0.0)) return std::nullopt;
  const double gamma = std::atan2(std::abs(cross(a, b)), dot(a, b));
  if (gamma < kMinSubtendedAngle || gamma > std::numbers::pi - kMinSubtendedAngle) return std::nullopt;

  const double rr = r0 * r1;
  const double c = dot(a, b) / rr;
  const double s = std::abs(cross(a, b)) / rr;  // sqrt(1 - cos^2)
  const double r0sq = r0 * r0;
  const double r1sq = r1 * r1;

  const Vec2 grad_c = a * (c / r0sq) + b * (c / r1sq) - (a + b) / rr;

  const Mat2 I = Mat2::identity();
  // J(a / (r0 r1)) and J(b / (r0 r1)), with J(x->y) = -I.
  const Mat2 j_a = -I / rr + outer(a, a) / (r0sq * rr) + outer(a, b) / (rr * r1sq);
  const Mat2 j_b = -I / rr + outer(b, a) / (r0sq * rr) + outer(b, b) / (rr * r1sq);
  // J(cos / r_i^2 * r_i).
  const Mat2 j_c0 = -I * (c / r0sq) + outer(a, grad_c) / r0sq + outer(a, a) * (2.0 * c / (r0sq * r0sq));
  const Mat2 j_c1 = -I * (c / r1sq) + outer(b, grad_c) / r1sq + outer(b, b) * (2.0 * c / (r1sq * r1sq));
  const Mat2 j_grad_c = -j_a - j_b + j_c0 + j_c1;

  FormFactorDerivs<2> out;
  out.value = gamma / kTwoPi;
  out.grad = grad_c * (-1.0 / (kTwoPi * s));
  out.hess = (j_grad_c / s + outer(grad_c, grad_c) * (c / (s * s * s))) * (-1.0 / kTwoPi);
  if (!finalize_hessian(out.hess)) return std::nullopt;
  return out;
}

FormFactorDerivs<2> ff_segment_derivs(const Vec2& x, const Vec2& y0, const Vec2& y1) {
  auto r = try_ff_segment_derivs(x, y0, y1);
  if (!r) throw DegenerateConfiguration("segment form factor: degenerate subtended angle");
  return *r;
}

namespace {

struct TriangleTerms {
  SolidAngleTerms terms;
  double r_len[3];
};

TriangleTerms triangle_terms(const Vec3& x, const Vec3& y1, const Vec3& y2, const Vec3& y3) {
  const Vec3 r[3] = {y1 - x, y2 - x, y3 - x};
  TriangleTerms t;
  double* rl = t.r_len;
  for (int i = 0; i < 3; ++i) rl[i] = norm(r[i]);
  SolidAngleTerms& s = t.terms;

  s.A = dot(r[0], cross(r[1], r[2]));
  const double d12 = dot(r[0], r[1]), d23 = dot(r[1], r[2]), d13 = dot(r[0], r[2]);
  s.B = rl[0] * rl[1] * rl[2] + d12 * rl[2] + d23 * rl[0] + d13 * rl[1];

  // grad A = <r3 - r2>^T r1 - r2 x r3, constant in x.
  s.gradA = transpose(cross_matrix(r[2] - r[1])) * r[0] - cross(r[1], r[2]);

  Vec3 grad_r[3];
  Mat3 hess_r[3];
  for (int i = 0; i < 3; ++i) {
    grad_r[i] = r[i] * (-1.0 / rl[i]);
    hess_r[i] = Mat3::identity() / rl[i] - outer(r[i], r[i]) / (rl[i] * rl[i] * rl[i]);
  }

  // grad and J(grad) of r1 r2 r3.
  Vec3 grad_prod = grad_r[0] * (rl[1] * rl[2]) + grad_r[1] * (rl[0] * rl[2]) + grad_r[2] * (rl[0] * rl[1]);
  Mat3 hess_prod = hess_r[0] * (rl[1] * rl[2]) + (outer(grad_r[2], grad_r[1]) + outer(grad_r[1], grad_r[2])) * rl[0] +
                   hess_r[1] * (rl[0] * rl[2]) + (outer(grad_r[2], grad_r[0]) + outer(grad_r[0], grad_r[2])) * rl[1] +
                   hess_r[2] * (rl[0] * rl[1]) + (outer(grad_r[1], grad_r[0]) + outer(grad_r[0], grad_r[1])) * rl[2];

  // (r_i . r_j) r_k terms.
  struct Pair {
    int i, j, k;
    double d;
  };
  const Pair pairs[3] = {{0, 1, 2, d12}, {1, 2, 0, d23}, {0, 2, 1, d13}};
  s.gradB = grad_prod;
  s.hessB = hess_prod;
  for (const auto& p : pairs) {
    const Vec3 sum = r[p.i] + r[p.j];
    s.gradB += grad_r[p.k] * p.d - sum * rl[p.k];
    s.hessB += hess_r[p.k] * p.d + Mat3::identity() * (2.0 * rl[p.k]) - outer(grad_r[p.k], sum) -
               outer(sum, grad_r[p.k]);
  }
  return t;
}

}  // namespace

SolidAngle solid_angle_triangle(const Vec3& x, const Vec3& y1, const Vec3& y2, const Vec3& y3) {
  SolidAngle out;
  const Vec3 n = cross(y2 - y1, y3 - y1);
  const double edge = std::max({norm(y2 - y1), norm(y3 - y1), norm(y3 - y2)});
  const TriangleTerms t = triangle_terms(x, y1, y2, y3);
  out.terms = t.terms;
  if (norm(n) <= 1e-14 * edge * edge) {
    out.omega = 0.0;  // collinear vertices
    return out;
  }
  if (!(t.r_len[0] > 0.0 && t.r_len[1] > 0.0 && t.r_len[2] > 0.0))
    throw DegenerateConfiguration("solid angle: x coincides with a vertex");
  const double abs_a = std::abs(t.terms.A);
  if (abs_a <= 1e-12 * t.r_len[0] * t.r_len[1] * t.r_len[2]) {
    if (t.terms.B > 0.0) {
      out.omega = 0.0;  // in the plane, outside the triangle
      return out;
    }
    throw DegenerateConfiguration("solid angle: x lies inside the triangle");
  }
  // atan2 folds in the +pi branch fix for B < 0.
  out.omega = 2.0 * std::atan2(abs_a, t.terms.B);
  return out;
}

std::optional<FormFactorDerivs<3>> try_ff_triangle_derivs(const Vec3& x, const Vec3& y1, const Vec3& y2,
                                                          const Vec3& y3) {
  const TriangleTerms t = triangle_terms(x, y1, y2, y3);
  const SolidAngleTerms& s = t.terms;
  const double abs_a = std::abs(s.A);
  if (!(abs_a > 1e-12 * t.r_len[0] * t.r_len[1] * t.r_len[2])) return std::nullopt;

  const double sign = s.A > 0.0 ? 1.0 : -1.0;
  const Vec3 grad_abs_a = s.gradA * sign;
  // J(grad |A|) = (A J(grad A) + gA gA^T)/|A| - A^2 gA gA^T/|A|^3 = 0 since J(grad A) = 0.
  const Mat3 hess_abs_a = Mat3::zero();

  const double B = s.B;
  const double D = abs_a * abs_a + B * B;
  const Vec3 num = grad_abs_a * B - s.gradB * abs_a;
  const Vec3 grad_d = grad_abs_a * (2.0 * abs_a) + s.gradB * (2.0 * B);

  FormFactorDerivs<3> out;
  out.value = std::atan2(abs_a, B) / kTwoPi;  // Omega / (4 pi)
  out.grad = num / (kTwoPi * D);
  out.hess = ((outer(grad_abs_a, s.gradB) - outer(s.gradB, grad_abs_a)) / D +
              (hess_abs_a * B - s.hessB * abs_a) / D - outer(num, grad_d) / (D * D)) /
             kTwoPi;
  if (!finalize_hessian(out.hess)) return std::nullopt;
  return out;
}

FormFactorDerivs<3> ff_triangle_derivs(const Vec3& x, const Vec3& y1, const Vec3& y2, const Vec3& y3) {
  auto r = try_ff_triangle_derivs(x, y1, y2, y3);
  if (!r) throw DegenerateConfiguration("triangle form factor: x is coplanar with the triangle");
  return *r;
}

template <int N>
double geometry_term(const Vec<N>& x, const Vec<N>& y, const Vec<N>& normal_at_y) {
  const Vec<N> d = x - y;
  const double r = norm(d);
  if (!(r > 0.0)) throw Error("geometry_term: coincident points");
  const double cos_y = std::max(0.0, dot(normal_at_y, d) / r);
  return N == 2 ? cos_y / r : cos_y / (r * r);
}

template double geometry_term(const Vec2&, const Vec2&, const Vec2&);
template double geometry_term(const Vec3&, const Vec3&, const Vec3&);

}  // namespace vrc
