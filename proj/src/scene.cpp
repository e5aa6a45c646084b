#include "vrc/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "vrc/rng.hpp"

namespace vrc {

template <>
Vec2 Surface<2>::normal() const {
  const Vec2 e = vertices[1] - vertices[0];
  return normalized(Vec2{-e[1], e[0]});
}

template <>
Vec3 Surface<3>::normal() const {
  return normalized(cross(vertices[1] - vertices[0], vertices[2] - vertices[0]));
}

template <>
double Surface<2>::measure() const {
  return norm(vertices[1] - vertices[0]);
}

template <>
double Surface<3>::measure() const {
  return 0.5 * norm(cross(vertices[1] - vertices[0], vertices[2] - vertices[0]));
}

template <int N>
Vec<N> Surface<N>::centroid() const {
  Vec<N> c;
  for (const auto& v : vertices) c += v;
  return c / double(N);
}

template <int N>
Scene<N>::Scene(std::vector<Surface<N>> surfaces, Medium medium, Bounds<N> bounds)
    : surfaces_(std::move(surfaces)), medium_(medium), bounds_(bounds) {
  if (!(medium_.sigma_s >= 0.0) || !(medium_.sigma_a >= 0.0))
    throw Error("medium coefficients must be non-negative");
  for (int i = 0; i < N; ++i)
    if (!(bounds_.hi[i] > bounds_.lo[i])) throw Error("scene bounds are empty");
  scale_ = bounds_.diagonal();
  const double slack = 1e-9 * scale_;
  for (std::size_t s = 0; s < surfaces_.size(); ++s) {
    const auto& surf = surfaces_[s];
    if (!(surf.measure() > 1e-12 * std::pow(scale_, N - 1)))
      throw Error("surface " + std::to_string(s) + " is degenerate");
    for (const auto& v : surf.vertices)
      if (!bounds_.contains(v, slack)) throw Error("surface " + std::to_string(s) + " lies outside the bounds");
    for (int ch = 0; ch < 3; ++ch) {
      if (!(surf.emission[ch] >= 0.0)) throw Error("emission must be non-negative");
      if (!(surf.albedo[ch] >= 0.0 && surf.albedo[ch] <= 1.0)) throw Error("albedo must lie in [0, 1]");
    }
    if (!surf.emission.is_black()) {
      emitters_.push_back(static_cast<int>(s));
      max_emission_ = std::max(max_emission_, surf.emission.luminance());
    }
  }
}

namespace {

bool hit_surface(const Surface<2>& s, const Ray<2>& ray, double t_min, double& t) {
  const Vec2 e = s.vertices[1] - s.vertices[0];
  const double denom = cross(ray.direction, e);
  if (std::abs(denom) < 1e-300) return false;
  const Vec2 w = s.vertices[0] - ray.origin;
  const double tt = cross(w, e) / denom;
  if (!(tt > t_min && tt <= ray.t_max)) return false;
  const double u = cross(w, ray.direction) / denom;
  if (u < 0.0 || u > 1.0) return false;
  t = tt;
  return true;
}

// Moller-Trumbore.
bool hit_surface(const Surface<3>& s, const Ray<3>& ray, double t_min, double& t) {
  const Vec3 e1 = s.vertices[1] - s.vertices[0];
  const Vec3 e2 = s.vertices[2] - s.vertices[0];
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  if (std::abs(det) < 1e-300) return false;
  const double inv = 1.0 / det;
  const Vec3 tv = ray.origin - s.vertices[0];
  const double u = dot(tv, p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 q = cross(tv, e1);
  const double v = dot(ray.direction, q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double tt = dot(e2, q) * inv;
  if (!(tt > t_min && tt <= ray.t_max)) return false;
  t = tt;
  return true;
}

}  // namespace

template <int N>
std::optional<Hit<N>> intersect(const Scene<N>& scene, const Ray<N>& ray) {
  const double t_min = scene.ray_epsilon();
  double best = std::numeric_limits<double>::infinity();
  int best_index = -1;
  const auto& surfaces = scene.surfaces();
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    double t;
    if (hit_surface(surfaces[i], ray, t_min, t) && t < best) {
      best = t;
      best_index = static_cast<int>(i);
    }
  }
  if (best_index < 0) return std::nullopt;
  Hit<N> hit;
  hit.t = best;
  hit.point = ray.origin + ray.direction * best;
  hit.surface = best_index;
  hit.normal = surfaces[best_index].normal();
  if (dot(hit.normal, ray.direction) > 0.0) hit.normal = -hit.normal;
  return hit;
}

template <int N>
Hit<N> trace_to_boundary(const Scene<N>& scene, const Vec<N>& origin, const Vec<N>& direction) {
  const auto& b = scene.bounds();
  double t_exit = std::numeric_limits<double>::infinity();
  int axis = 0;
  for (int i = 0; i < N; ++i) {
    double t = std::numeric_limits<double>::infinity();
    if (direction[i] > 0.0)
      t = (b.hi[i] - origin[i]) / direction[i];
    else if (direction[i] < 0.0)
      t = (b.lo[i] - origin[i]) / direction[i];
    if (t < t_exit) {
      t_exit = t;
      axis = i;
    }
  }
  t_exit = std::max(t_exit, 0.0);
  if (auto hit = intersect(scene, Ray<N>{origin, direction, t_exit})) return *hit;
  Hit<N> wall;
  wall.t = t_exit;
  wall.point = origin + direction * t_exit;
  wall.normal = Vec<N>::axis(axis) * (direction[axis] > 0.0 ? -1.0 : 1.0);
  wall.surface = kBoundarySurface;
  return wall;
}

template <int N>
bool visible(const Scene<N>& scene, const Vec<N>& a, const Vec<N>& b) {
  const Vec<N> d = b - a;
  const double len = norm(d);
  if (len == 0.0) return true;
  const double eps = scene.ray_epsilon();
  return !intersect(scene, Ray<N>{a, d / len, len - eps}).has_value();
}

namespace {

int rows_for(int n) {
  int rows = 1;
  for (int r = 1; double(r) * r * 2.0 <= double(n); ++r)
    if (n % r == 0) rows = r;
  return rows;
}

}  // namespace

int valid_direction_count_3d(int n) {
  for (int m = std::max(n, 8);; ++m) {
    const int rows = rows_for(m);
    if (rows >= 2 && m / rows >= 3) return m;
  }
}

template <>
DirectionSet<2> stratified_directions<2>(int n, std::uint64_t seed, bool jitter) {
  if (n < 3) throw Error("2D stratification needs at least 3 directions");
  DirectionSet<2> set;
  set.cols = n;
  set.directions.resize(n);
  set.stratum_measure.assign(n, 2.0 * std::numbers::pi / n);
  set.elements.resize(n);
  Rng rng(stream_seed(seed, 0x2d));
  const double width = 2.0 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) {
    const double u = jitter ? rng.uniform() : 0.5;
    const double phi = (k + u) * width;
    set.directions[k] = Vec2{std::cos(phi), std::sin(phi)};
    set.elements[k] = {k, (k + 1) % n};
  }
  return set;
}

template <>
DirectionSet<3> stratified_directions<3>(int n, std::uint64_t seed, bool jitter) {
  const int rows = rows_for(n);
  if (n < 8 || rows < 2 || n / rows < 3)
    throw Error("3D direction count " + std::to_string(n) + " does not factor into an equal-area grid");
  const int cols = n / rows;
  DirectionSet<3> set;
  set.rows = rows;
  set.cols = cols;
  set.directions.resize(n);
  set.stratum_measure.assign(n, 4.0 * std::numbers::pi / n);
  Rng rng(stream_seed(seed, 0x3d));
  const double dz = 2.0 / rows;
  const double dphi = 2.0 * std::numbers::pi / cols;
  auto index = [cols](int i, int j) { return i * cols + (j % cols); };
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double u = jitter ? rng.uniform() : 0.5;
      const double v = jitter ? rng.uniform() : 0.5;
      const double z = -1.0 + (i + u) * dz;
      const double phi = (j + v) * dphi;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      set.directions[index(i, j)] = Vec3{rho * std::cos(phi), rho * std::sin(phi), z};
    }
  }
  for (int i = 0; i + 1 < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int a = index(i, j), b = index(i, j + 1), c = index(i + 1, j), d = index(i + 1, j + 1);
      set.elements.push_back({a, b, d});
      set.elements.push_back({a, d, c});
    }
  }
  // Polar caps: fan over the first and last rows.
  for (int j = 1; j + 1 < cols; ++j) {
    set.elements.push_back({index(0, 0), index(0, j), index(0, j + 1)});
    set.elements.push_back({index(rows - 1, 0), index(rows - 1, j), index(rows - 1, j + 1)});
  }
  return set;
}

template struct Surface<2>;
template struct Surface<3>;
template class Scene<2>;
template class Scene<3>;
template std::optional<Hit<2>> intersect(const Scene<2>&, const Ray<2>&);
template std::optional<Hit<3>> intersect(const Scene<3>&, const Ray<3>&);
template Hit<2> trace_to_boundary(const Scene<2>&, const Vec2&, const Vec2&);
template Hit<3> trace_to_boundary(const Scene<3>&, const Vec3&, const Vec3&);
template bool visible(const Scene<2>&, const Vec2&, const Vec2&);
template bool visible(const Scene<3>&, const Vec3&, const Vec3&);

}  // namespace vrc
