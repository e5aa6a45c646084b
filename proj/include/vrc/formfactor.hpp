#pragma once

// Closed-form point-to-element form factors (fraction of the circle or sphere
// subtended by a segment or triangle) with translational gradients and
// Hessians.

#include <array>
#include <optional>

#include "vrc/numerics.hpp"
#include "vrc/scene.hpp"

namespace vrc {

// Thrown when a configuration sits on a singularity of the derivative formulas.
struct DegenerateConfiguration : Error {
  using Error::Error;
};

template <int N>
struct FormFactorDerivs {
  double value = 0.0;  // fraction of the full circle / sphere
  Vec<N> grad;         // [1/length]
  Mat<N> hess;         // [1/length^2], symmetric
};

// Segments subtending less than this (or within it of pi) are degenerate.
inline constexpr double kMinSubtendedAngle = 1e-5;

// Subtended angle / (2 pi), valid for any x off the segment's line.
double ff_segment_value(const Vec2& x, const Vec2& y0, const Vec2& y1);

std::optional<FormFactorDerivs<2>> try_ff_segment_derivs(const Vec2& x, const Vec2& y0, const Vec2& y1);
// Throws DegenerateConfiguration instead of returning nullopt.
FormFactorDerivs<2> ff_segment_derivs(const Vec2& x, const Vec2& y0, const Vec2& y1);

// Terms of the Van Oosterom-Strackee solid angle, Omega = 2 atan2(|A|, B).
// The Jacobian of grad A vanishes identically, so no hessA is stored.
struct SolidAngleTerms {
  double A = 0.0;  // r1 . (r2 x r3)            [length^3]
  double B = 0.0;  // r1 r2 r3 + (r1.r2) r3 + (r2.r3) r1 + (r1.r3) r2  [length^3]
  Vec3 gradA;
  Vec3 gradB;
  Mat3 hessB;
};

struct SolidAngle {
  double omega = 0.0;  // [sr], in [0, 2 pi)
  SolidAngleTerms terms;
};

// Winding-independent. Collinear vertices give 0; x inside the triangle's
// plane and inside the triangle throws DegenerateConfiguration.
SolidAngle solid_angle_triangle(const Vec3& x, const Vec3& y1, const Vec3& y2, const Vec3& y3);

std::optional<FormFactorDerivs<3>> try_ff_triangle_derivs(const Vec3& x, const Vec3& y1, const Vec3& y2,
                                                          const Vec3& y3);
FormFactorDerivs<3> ff_triangle_derivs(const Vec3& x, const Vec3& y1, const Vec3& y2, const Vec3& y3);

// Dimension-generic dispatch used by the subdivision.
inline std::optional<FormFactorDerivs<2>> try_ff_element_derivs(const Vec2& x, const std::array<Vec2, 2>& v) {
  return try_ff_segment_derivs(x, v[0], v[1]);
}
inline std::optional<FormFactorDerivs<3>> try_ff_element_derivs(const Vec3& x, const std::array<Vec3, 3>& v) {
  return try_ff_triangle_derivs(x, v[0], v[1], v[2]);
}

// cos(theta_y) / |x - y| (2D) or cos(theta_y) / |x - y|^2 (3D), with the
// cosine clamped at zero for back-facing points.
template <int N>
double geometry_term(const Vec<N>& x, const Vec<N>& y, const Vec<N>& normal_at_y);

}  // namespace vrc
