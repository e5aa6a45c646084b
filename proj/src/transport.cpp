#include "vrc/transport.hpp"

#include <cmath>

namespace vrc {

template <int N>
TransmittanceDerivs<N> transmittance_derivs(const Vec<N>& x, const Vec<N>& y, const Medium& medium) {
  const Vec<N> d = x - y;  // y -> x
  const double r = norm(d);
  if (!(r > 0.0)) throw Error("transmittance_derivs: coincident points");
  const double sigma = medium.sigma_t();
  TransmittanceDerivs<N> out;
  out.value = std::exp(-sigma * r);
  out.grad = d * (-sigma * out.value / r);
  const Mat<N> ddt = outer(d, d);
  out.hess = (Mat<N>::identity() / r - ddt / (r * r * r) - ddt * (sigma / (r * r))) * (-sigma * out.value);
  return out;
}

double phase_eval(const Phase& phase) {
  if (phase.dimensionality == 2) return 1.0 / (2.0 * std::numbers::pi);
  if (phase.dimensionality == 3) return 1.0 / (4.0 * std::numbers::pi);
  throw Error("phase: dimensionality must be 2 or 3");
}

template <>
Vec2 uniform_direction<2>(Rng& rng) {
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  return {std::cos(phi), std::sin(phi)};
}

template <>
Vec3 uniform_direction<3>(Rng& rng) {
  const double z = 1.0 - 2.0 * rng.uniform();
  const double phi = 2.0 * std::numbers::pi * rng.uniform();
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {rho * std::cos(phi), rho * std::sin(phi), z};
}

namespace {

// Midpoints (and measures) of a regular subdivision of an emitter.
template <int N>
void emitter_samples(const Surface<N>& s, int k, std::vector<Vec<N>>& points, double& cell_measure);

template <>
void emitter_samples<2>(const Surface<2>& s, int k, std::vector<Vec2>& points, double& cell_measure) {
  points.clear();
  for (int i = 0; i < k; ++i) {
    const double u = (i + 0.5) / k;
    points.push_back(s.vertices[0] * (1.0 - u) + s.vertices[1] * u);
  }
  cell_measure = s.measure() / k;
}

template <>
void emitter_samples<3>(const Surface<3>& s, int k, std::vector<Vec3>& points, double& cell_measure) {
  // k^2 congruent sub-triangles; their centroids.
  points.clear();
  const Vec3 e1 = (s.vertices[1] - s.vertices[0]) / double(k);
  const Vec3 e2 = (s.vertices[2] - s.vertices[0]) / double(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; i + j < k; ++j) {
      const Vec3 base = s.vertices[0] + e1 * double(i) + e2 * double(j);
      points.push_back(base + (e1 + e2) / 3.0);
      if (i + j + 1 < k) points.push_back(base + (e1 + e2) * (2.0 / 3.0));
    }
  }
  cell_measure = s.measure() / (double(k) * k);
}

}  // namespace

template <int N>
Rgb surface_outgoing_radiance(const Scene<N>& scene, const Hit<N>& hit, int quadrature) {
  if (hit.on_boundary()) return {};
  const auto& surf = scene.surfaces()[hit.surface];
  Rgb out = surf.emission;
  if (surf.albedo.is_black()) return out;

  // Lambertian BRDF normalization: 1/2 over the 2D half-circle, 1/pi in 3D.
  const double brdf_norm = N == 2 ? 0.5 : 1.0 / std::numbers::pi;
  const Vec<N> origin = hit.point + hit.normal * (10.0 * scene.ray_epsilon());
  std::vector<Vec<N>> points;
  Rgb direct;
  for (int e : scene.emitters()) {
    if (e == hit.surface) continue;
    const auto& light = scene.surfaces()[e];
    const Vec<N> light_normal = light.normal();
    double cell = 0.0;
    emitter_samples<N>(light, quadrature, points, cell);
    for (const auto& p : points) {
      const Vec<N> d = p - hit.point;
      const double r = norm(d);
      const Vec<N> w = d / r;
      const double cos_x = dot(hit.normal, w);
      if (cos_x <= 0.0) continue;
      const double cos_y = std::abs(dot(light_normal, w));
      if (cos_y <= 0.0) continue;
      if (!visible(scene, origin, p)) continue;
      const double g = cos_x * cos_y / (N == 2 ? r : r * r);
      direct += light.emission * (g * cell * transmittance(r, scene.medium()));
    }
  }
  return out + surf.albedo * direct * brdf_norm;
}

template <int N>
ScatterSplit inscatter_sample(const Scene<N>& scene, const Vec<N>& x, int max_bounces, Rng& rng) {
  ScatterSplit out;
  const Medium& medium = scene.medium();
  if (max_bounces < 1 || medium.sigma_s <= 0.0) return out;
  const Vec<N> dir = uniform_direction<N>(rng);
  const Hit<N> hit = trace_to_boundary(scene, x, dir);
  // sigma_s * phase / pdf(direction) == sigma_s for an isotropic phase.
  out.single = surface_outgoing_radiance(scene, hit) * (medium.sigma_s * transmittance(hit.t, medium));
  if (max_bounces >= 2) {
    const double t = -std::log(1.0 - rng.uniform()) / medium.sigma_t();
    if (t < hit.t) {
      const Vec<N> y = x + dir * t;
      const ScatterSplit inner = inscatter_sample(scene, y, max_bounces - 1, rng);
      out.multiple = inner.total() * medium.albedo();
    }
  }
  return out;
}

template <int N>
ScatterSplit path_trace_radiance(const Scene<N>& scene, const Vec<N>& x, long n_samples, int max_media_bounces,
                                 std::uint64_t seed) {
  ScatterSplit sum;
  for (long i = 0; i < n_samples; ++i) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
    const ScatterSplit s = inscatter_sample(scene, x, max_media_bounces, rng);
    sum.single += s.single;
    sum.multiple += s.multiple;
  }
  if (n_samples > 0) {
    sum.single *= 1.0 / double(n_samples);
    sum.multiple *= 1.0 / double(n_samples);
  }
  return sum;
}

template TransmittanceDerivs<2> transmittance_derivs(const Vec2&, const Vec2&, const Medium&);
template TransmittanceDerivs<3> transmittance_derivs(const Vec3&, const Vec3&, const Medium&);
template Rgb surface_outgoing_radiance(const Scene<2>&, const Hit<2>&, int);
template Rgb surface_outgoing_radiance(const Scene<3>&, const Hit<3>&, int);
template ScatterSplit inscatter_sample(const Scene<2>&, const Vec2&, int, Rng&);
template ScatterSplit inscatter_sample(const Scene<3>&, const Vec3&, int, Rng&);
template ScatterSplit path_trace_radiance(const Scene<2>&, const Vec2&, long, int, std::uint64_t);
template ScatterSplit path_trace_radiance(const Scene<3>&, const Vec3&, long, int, std::uint64_t);

}  // namespace vrc
