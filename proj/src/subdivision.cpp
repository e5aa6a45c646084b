#include "vrc/subdivision.hpp"

#include <cmath>
#include <ostream>

namespace vrc {

const char* to_string(ScatterKind k) { return k == ScatterKind::single ? "single" : "multiple"; }

template <int N>
Vec<N> Moments<N>::luminance_grad() const {
  Vec<N> g;
  for (int c = 0; c < 3; ++c) g += grad[c] * kLuminanceWeights[c];
  return g;
}

template <int N>
Mat<N> Moments<N>::luminance_hess() const {
  Mat<N> h;
  for (int c = 0; c < 3; ++c) h += hess[c] * kLuminanceWeights[c];
  return h;
}

template <int N>
Moments<N>& Moments<N>::operator+=(const Moments& o) {
  L += o.L;
  for (int c = 0; c < 3; ++c) {
    grad[c] += o.grad[c];
    hess[c] += o.hess[c];
  }
  return *this;
}

template <>
SubdivisionSettings default_subdivision_settings<2>() {
  return {};
}

template <>
SubdivisionSettings default_subdivision_settings<3>() {
  SubdivisionSettings s;
  s.n_angular = 16384;
  return s;
}

namespace {

// Stream used for the m-th path sample at media vertex (direction k, ring i).
// Offset by one so it never coincides with path_trace_radiance's streams.
std::uint64_t media_stream(const SubdivisionSettings& s, int k, int ring, int m) {
  return stream_seed(s.seed, static_cast<std::uint64_t>(k),
                     1 + static_cast<std::uint64_t>(ring) * s.media_samples + m);
}

}  // namespace

template <int N>
RingElement<N> Subdivision<N>::element(const Ring<N>& ring, int e) const {
  RingElement<N> out;
  const auto& idx = directions.elements[e];
  int far = idx[0];
  double far_d = -1.0;
  for (int v = 0; v < N; ++v) {
    out.vertices[v] = ring.points[idx[v]];
    out.is_star[v] = ring.is_star[idx[v]] != 0;
    const double d = norm(out.vertices[v] - center);
    if (d > far_d) {
      far_d = d;
      far = idx[v];
    }
  }
  out.representative_radiance = ring.radiance[far];
  out.representative_distance = far_d;
  out.representative_point = ring.points[far];
  return out;
}

template <int N>
Subdivision<N> build_subdivision(const Scene<N>& scene, const Vec<N>& x, const SubdivisionSettings& settings) {
  if (!(settings.march_step > 0.0)) throw Error("build_subdivision: march_step must be positive");
  if (settings.media_samples < 1) throw Error("build_subdivision: media_samples must be >= 1");
  Subdivision<N> sub;
  sub.center = x;
  sub.directions = stratified_directions<N>(settings.n_angular, settings.seed, settings.jitter);
  const int n = static_cast<int>(sub.directions.directions.size());

  std::vector<Hit<N>> hits(n);
  double s_max = 0.0;
  sub.surface_distance.resize(n);
  for (int k = 0; k < n; ++k) {
    hits[k] = trace_to_boundary(scene, x, sub.directions.directions[k]);
    sub.surface_distance[k] = hits[k].t;
    s_max = std::max(s_max, hits[k].t);
  }

  const int inner_bounces = settings.max_media_bounces - 1;
  if (settings.media_rings && inner_bounces >= 1 && scene.medium().sigma_s > 0.0) {
    const double step = settings.march_step;
    for (int i = 1; (i - 0.5) * step < s_max; ++i) {
      Ring<N> ring;
      ring.kind = RingKind::media;
      ring.distance = (i - 0.5) * step;
      ring.weight = step;
      ring.points.resize(n);
      ring.radiance.resize(n);
      ring.is_star.assign(n, 0);
      for (int k = 0; k < n; ++k) {
        if (ring.distance < sub.surface_distance[k]) {
          const Vec<N> y = x + sub.directions.directions[k] * ring.distance;
          ring.points[k] = y;
          Rgb sum;
          for (int m = 0; m < settings.media_samples; ++m) {
            Rng rng(media_stream(settings, k, i, m));
            sum += inscatter_sample(scene, y, inner_bounces, rng).total();
          }
          ring.radiance[k] = sum * (1.0 / settings.media_samples);
        } else {
          ring.points[k] = hits[k].point;
          ring.is_star[k] = 1;
        }
      }
      sub.rings.push_back(std::move(ring));
    }
  }

  Ring<N> surface;
  surface.kind = RingKind::surface;
  surface.weight = 1.0;
  surface.points.resize(n);
  surface.radiance.resize(n);
  surface.is_star.assign(n, 0);
  for (int k = 0; k < n; ++k) {
    surface.points[k] = hits[k].point;
    surface.radiance[k] = surface_outgoing_radiance(scene, hits[k]);
  }
  sub.rings.push_back(std::move(surface));
  return sub;
}

template <int N>
Rgb element_radiance(const RingElement<N>& elem, const Vec<N>& x, const Medium& medium) {
  if (elem.representative_radiance.is_black()) return {};
  double f = 0.0;
  if constexpr (N == 2) {
    const double gamma = 2.0 * std::numbers::pi * ff_segment_value(x, elem.vertices[0], elem.vertices[1]);
    if (gamma < kMinSubtendedAngle || gamma > std::numbers::pi - kMinSubtendedAngle) return {};
    f = gamma / (2.0 * std::numbers::pi);
  } else {
    try {
      f = solid_angle_triangle(x, elem.vertices[0], elem.vertices[1], elem.vertices[2]).omega /
          (4.0 * std::numbers::pi);
    } catch (const DegenerateConfiguration&) {
      return {};
    }
  }
  return elem.representative_radiance *
         (medium.sigma_s * transmittance(elem.representative_distance, medium) * f);
}

template <int N>
MomentEstimate<N> estimate_moments(const Scene<N>& scene, const Subdivision<N>& sub) {
  MomentEstimate<N> out;
  out.single.kind = ScatterKind::single;
  out.multiple.kind = ScatterKind::multiple;
  const Medium& medium = scene.medium();
  const Vec<N>& x = sub.center;
  const int n_elem = static_cast<int>(sub.directions.elements.size());

  for (const Ring<N>& ring : sub.rings) {
    Moments<N>& acc = ring.kind == RingKind::surface ? out.single : out.multiple;
    for (int e = 0; e < n_elem; ++e) {
      const RingElement<N> elem = sub.element(ring, e);
      if (elem.representative_radiance.is_black()) continue;
      ++out.stats.evaluated;
      const auto ff = try_ff_element_derivs(x, elem.vertices);
      if (!ff) {
        ++out.stats.dropped;
        continue;
      }
      const TransmittanceDerivs<N> tr = transmittance_derivs(x, elem.representative_point, medium);
      const Vec<N> grad = ff->grad * tr.value + tr.grad * ff->value;
      const Mat<N> hess = ff->hess * tr.value + outer(tr.grad, ff->grad) + outer(ff->grad, tr.grad) +
                          tr.hess * ff->value;
      for (int c = 0; c < 3; ++c) {
        const double coef = ring.weight * medium.sigma_s * elem.representative_radiance[c];
        acc.L[c] += coef * tr.value * ff->value;
        acc.grad[c] += grad * coef;
        acc.hess[c] += hess * coef;
      }
    }
  }

  const double domain = direction_domain_measure<N>();
  const int n = static_cast<int>(sub.directions.directions.size());
  for (const Ring<N>& ring : sub.rings) {
    Rgb& acc = ring.kind == RingKind::surface ? out.direct_single : out.direct_multiple;
    for (int k = 0; k < n; ++k) {
      if (ring.is_star[k] || ring.radiance[k].is_black()) continue;
      const double r = ring.kind == RingKind::surface ? sub.surface_distance[k] : ring.distance;
      acc += ring.radiance[k] * (ring.weight * medium.sigma_s * transmittance(r, medium) *
                                 sub.directions.stratum_measure[k] / domain);
    }
  }
  return out;
}

template <int N>
MomentEstimate<N> estimate_moments(const Scene<N>& scene, const Vec<N>& x, const SubdivisionSettings& settings) {
  return estimate_moments(scene, build_subdivision(scene, x, settings));
}

namespace {

// Per-sample single-scatter value and gradient with the surface hit held
// fixed: sigma_s * L_o * (grad T + T grad G / G), per unit direction weight.
template <int N>
bool fixed_hit_gradient(const Scene<N>& scene, const Vec<N>& x, const Hit<N>& hit, Rgb& value,
                        std::array<Vec<N>, 3>& grad) {
  if (hit.on_boundary()) return false;
  const Rgb lo = surface_outgoing_radiance(scene, hit);
  if (lo.is_black()) return false;
  const Medium& medium = scene.medium();
  const Vec<N> d = x - hit.point;
  const double r = norm(d);
  const double cos_y = dot(hit.normal, d) / r;
  if (cos_y < 1e-6) return false;
  const double t = transmittance(r, medium);
  const Vec<N> grad_t = d * (-medium.sigma_t() * t / r);
  // grad G / G for G = cos_y / r^(N-1).
  const Vec<N> grad_cos = hit.normal / r - d * (cos_y / (r * r));
  const Vec<N> dlog_g = grad_cos / cos_y - d * ((N - 1) / (r * r));
  const Vec<N> g = grad_t + dlog_g * t;
  for (int c = 0; c < 3; ++c) {
    value[c] = medium.sigma_s * t * lo[c];
    grad[c] = g * (medium.sigma_s * lo[c]);
  }
  return true;
}

template <int N>
double luminance_norm(const std::array<Vec<N>, 3>& g) {
  Vec<N> l;
  for (int c = 0; c < 3; ++c) l += g[c] * kLuminanceWeights[c];
  return norm(l);
}

}  // namespace

template <int N>
UnawareGradient<N> occlusion_unaware_gradient(const Scene<N>& scene, const Vec<N>& x,
                                              const SubdivisionSettings& settings) {
  UnawareGradient<N> out;
  const Medium& medium = scene.medium();
  if (medium.sigma_s <= 0.0) return out;
  const DirectionSet<N> dirs = stratified_directions<N>(settings.n_angular, settings.seed, settings.jitter);
  const double domain = direction_domain_measure<N>();
  const int n = static_cast<int>(dirs.directions.size());
  const bool media = settings.media_rings && settings.max_media_bounces >= 2;

  for (int k = 0; k < n; ++k) {
    const double wk = dirs.stratum_measure[k] / domain;
    const Hit<N> hit = trace_to_boundary(scene, x, dirs.directions[k]);
    Rgb v;
    std::array<Vec<N>, 3> g{};
    if (fixed_hit_gradient(scene, x, hit, v, g)) {
      out.single_value += v * wk;
      for (int c = 0; c < 3; ++c) out.single[c] += g[c] * wk;
      out.single_sum_l += v.luminance();
      out.single_sum_grad += luminance_norm<N>(g);
    }
    if (!media) continue;
    const double step = settings.march_step;
    for (int i = 1; (i - 0.5) * step < hit.t; ++i) {
      const double r = (i - 0.5) * step;
      const Vec<N> y = x + dirs.directions[k] * r;
      const double scale = wk * step * medium.sigma_s * transmittance(r, medium) / settings.media_samples;
      for (int m = 0; m < settings.media_samples; ++m) {
        Rng rng(media_stream(settings, k, i, m));
        const Hit<N> h2 = trace_to_boundary(scene, y, uniform_direction<N>(rng));
        if (!fixed_hit_gradient(scene, y, h2, v, g)) continue;
        out.multiple_value += v * scale;
        for (int c = 0; c < 3; ++c) out.multiple[c] += g[c] * scale;
        out.multiple_sum_l += v.luminance() * step * transmittance(r, medium);
        out.multiple_sum_grad += luminance_norm<N>(g) * step * transmittance(r, medium);
      }
    }
  }
  return out;
}

template <int N>
void write_subdivision_text(std::ostream& os, const Scene<N>& scene, const Subdivision<N>& sub) {
  auto point = [&os](const Vec<N>& p) {
    for (int i = 0; i < N; ++i) os << ' ' << p[i];
  };
  os << "# subdivision dim " << N << " directions " << sub.directions.directions.size() << " rings "
     << sub.rings.size() << '\n';
  os << "center";
  point(sub.center);
  os << '\n';
  const int n_elem = static_cast<int>(sub.directions.elements.size());
  for (std::size_t ri = 0; ri < sub.rings.size(); ++ri) {
    const Ring<N>& ring = sub.rings[ri];
    os << "ring " << ri << ' ' << (ring.kind == RingKind::surface ? "surface" : "media") << ' ' << ring.distance
       << ' ' << ring.weight << '\n';
    for (std::size_t k = 0; k < ring.points.size(); ++k) {
      os << "v " << ri << ' ' << k;
      point(ring.points[k]);
      os << ' ' << int(ring.is_star[k]) << ' ' << ring.radiance[k][0] << ' ' << ring.radiance[k][1] << ' '
         << ring.radiance[k][2] << '\n';
    }
    for (int e = 0; e < n_elem; ++e) {
      const RingElement<N> elem = sub.element(ring, e);
      const Rgb l = element_radiance(elem, sub.center, scene.medium());
      os << "e " << ri;
      for (int v : sub.directions.elements[e]) os << ' ' << v;
      os << ' ' << l[0] << ' ' << l[1] << ' ' << l[2] << '\n';
    }
  }
}

template struct Moments<2>;
template struct Moments<3>;
template struct Subdivision<2>;
template struct Subdivision<3>;
template Subdivision<2> build_subdivision(const Scene<2>&, const Vec2&, const SubdivisionSettings&);
template Subdivision<3> build_subdivision(const Scene<3>&, const Vec3&, const SubdivisionSettings&);
template Rgb element_radiance(const RingElement<2>&, const Vec2&, const Medium&);
template Rgb element_radiance(const RingElement<3>&, const Vec3&, const Medium&);
template MomentEstimate<2> estimate_moments(const Scene<2>&, const Subdivision<2>&);
template MomentEstimate<3> estimate_moments(const Scene<3>&, const Subdivision<3>&);
template MomentEstimate<2> estimate_moments(const Scene<2>&, const Vec2&, const SubdivisionSettings&);
template MomentEstimate<3> estimate_moments(const Scene<3>&, const Vec3&, const SubdivisionSettings&);
template UnawareGradient<2> occlusion_unaware_gradient(const Scene<2>&, const Vec2&, const SubdivisionSettings&);
template UnawareGradient<3> occlusion_unaware_gradient(const Scene<3>&, const Vec3&, const SubdivisionSettings&);
template void write_subdivision_text(std::ostream&, const Scene<2>&, const Subdivision<2>&);
template void write_subdivision_text(std::ostream&, const Scene<3>&, const Subdivision<3>&);

}  // namespace vrc
