#pragma once

// Flatland (segments) and 3D (triangles) scenes filled with one homogeneous
// isotropic medium, plus ray queries and stratified angular sampling.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrc/numerics.hpp"

namespace vrc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Rgb {
  std::array<double, 3> c{};

  constexpr Rgb() = default;
  constexpr Rgb(double r, double g, double b) : c{r, g, b} {}
  static constexpr Rgb gray(double v) { return {v, v, v}; }

  constexpr double& operator[](int i) { return c[i]; }
  constexpr double operator[](int i) const { return c[i]; }

  constexpr Rgb& operator+=(const Rgb& o) {
    for (int i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  constexpr Rgb& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  friend constexpr Rgb operator+(Rgb a, const Rgb& b) { return a += b; }
  friend constexpr Rgb operator-(Rgb a, const Rgb& b) {
    for (int i = 0; i < 3; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr Rgb operator*(Rgb a, double s) { return a *= s; }
  friend constexpr Rgb operator*(double s, Rgb a) { return a *= s; }
  friend constexpr Rgb operator*(Rgb a, const Rgb& b) {
    for (int i = 0; i < 3; ++i) a.c[i] *= b.c[i];
    return a;
  }
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;

  constexpr double luminance() const { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }
  constexpr double max() const { return std::max(c[0], std::max(c[1], c[2])); }
  constexpr bool is_black() const { return c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0; }
};

inline constexpr std::array<double, 3> kLuminanceWeights{0.2126, 0.7152, 0.0722};

struct Medium {
  double sigma_s = 0.0;  // [1/length]
  double sigma_a = 0.0;  // [1/length]

  constexpr double sigma_t() const { return sigma_s + sigma_a; }
  constexpr double albedo() const { return sigma_t() > 0.0 ? sigma_s / sigma_t() : 0.0; }
};

// A segment (N = 2) or triangle (N = 3). Surfaces are two-sided Lambertian.
template <int N>
struct Surface {
  std::array<Vec<N>, N> vertices{};
  Rgb emission;
  Rgb albedo;

  // Unit geometric normal (orientation follows the vertex order).
  Vec<N> normal() const;
  // Length (2D) or area (3D).
  double measure() const;
  Vec<N> centroid() const;
};

template <int N>
struct Bounds {
  Vec<N> lo;
  Vec<N> hi;

  bool contains(const Vec<N>& p, double slack = 0.0) const {
    for (int i = 0; i < N; ++i)
      if (p[i] < lo[i] - slack || p[i] > hi[i] + slack) return false;
    return true;
  }
  double diagonal() const { return norm(hi - lo); }
  Vec<N> center() const { return (lo + hi) * 0.5; }
};

template <int N>
class Scene {
 public:
  Scene(std::vector<Surface<N>> surfaces, Medium medium, Bounds<N> bounds);

  const std::vector<Surface<N>>& surfaces() const { return surfaces_; }
  const Medium& medium() const { return medium_; }
  const Bounds<N>& bounds() const { return bounds_; }
  const std::vector<int>& emitters() const { return emitters_; }

  // Bounding-box diagonal; every relative epsilon references it.
  double scale() const { return scale_; }
  double ray_epsilon() const { return 1e-6 * scale_; }
  // Largest emitted luminance over all surfaces.
  double max_emission() const { return max_emission_; }

 private:
  std::vector<Surface<N>> surfaces_;
  Medium medium_;
  Bounds<N> bounds_;
  std::vector<int> emitters_;
  double scale_ = 1.0;
  double max_emission_ = 0.0;
};

template <int N>
struct Ray {
  Vec<N> origin;
  Vec<N> direction;  // unit length
  double t_max = 1e300;
};

inline constexpr int kBoundarySurface = -1;

template <int N>
struct Hit {
  double t = 0.0;
  Vec<N> point;
  Vec<N> normal;  // unit, facing the ray origin
  int surface = kBoundarySurface;

  bool on_boundary() const { return surface == kBoundarySurface; }
};

// Nearest surface hit with t in (ray_epsilon, t_max]; the bounds are not
// geometry for this query.
template <int N>
std::optional<Hit<N>> intersect(const Scene<N>& scene, const Ray<N>& ray);

// Nearest surface hit, or the exit point through the bounds, which act as a
// black far surface. `origin` must lie inside the bounds.
template <int N>
Hit<N> trace_to_boundary(const Scene<N>& scene, const Vec<N>& origin, const Vec<N>& direction);

// True when the open segment between a and b is free of surfaces.
template <int N>
bool visible(const Scene<N>& scene, const Vec<N>& a, const Vec<N>& b);

// One jittered direction per stratum of an equal-angle (2D) or equal-solid-angle
// (3D) partition, with the element connectivity used to build subdivisions.
template <int N>
struct DirectionSet {
  std::vector<Vec<N>> directions;
  std::vector<double> stratum_measure;  // radians (2D) or steradians (3D)
  // Index tuples of adjacent strata: cyclic neighbours (2D), grid triangles
  // plus polar caps (3D).
  std::vector<std::array<int, N>> elements;
  int rows = 1;  // latitude bands (3D)
  int cols = 0;  // equal-phi columns (3D), or the direction count (2D)
};

// 3D counts must factor as rows x cols with rows the largest divisor not above
// sqrt(n/2), rows >= 2 and cols >= 3. `jitter == false` places every direction
// at its stratum center.
template <int N>
DirectionSet<N> stratified_directions(int n, std::uint64_t seed, bool jitter = true);

// Pinhole camera for 3D renders.
struct Camera {
  Vec3 position{0.0, 0.0, 0.0};
  Vec3 look_at{0.0, 0.0, -1.0};
  Vec3 up{0.0, 1.0, 0.0};
  double fov_deg = 45.0;  // vertical
  int width = 64;
  int height = 64;
};

// Smallest valid 3D direction count >= n.
int valid_direction_count_3d(int n);

}  // namespace vrc
