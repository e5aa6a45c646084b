#include "vrc/renderer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace vrc {

const char* to_string(RenderMode m) {
  switch (m) {
    case RenderMode::ours_iso: return "ours-iso";
    case RenderMode::ours_aniso: return "ours-aniso";
    case RenderMode::baseline: return "baseline";
    case RenderMode::path: return "path";
    case RenderMode::quadrature: return "quadrature";
  }
  return "?";
}

std::optional<RenderMode> parse_render_mode(const std::string& s) {
  for (RenderMode m : {RenderMode::ours_iso, RenderMode::ours_aniso, RenderMode::baseline, RenderMode::path,
                       RenderMode::quadrature})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

Vec2 FieldGrid::cell_center(int i, int j) const {
  return {bounds.lo[0] + (i + 0.5) * (bounds.hi[0] - bounds.lo[0]) / nx,
          bounds.lo[1] + (j + 0.5) * (bounds.hi[1] - bounds.lo[1]) / ny};
}

FieldGrid make_field_grid(const Scene<2>& scene, int resolution) {
  if (resolution < 1) throw Error("field resolution must be positive");
  return {scene.bounds(), resolution, resolution};
}

template <int N>
CachePair<N> make_cache_pair(const Scene<N>& scene) {
  return {RadianceCache<N>(scene.bounds(), ScatterKind::single),
          RadianceCache<N>(scene.bounds(), ScatterKind::multiple)};
}

template <>
int effective_n_angular<2>(const RenderSettings& s) {
  return s.n_angular > 0 ? s.n_angular : default_subdivision_settings<2>().n_angular;
}

template <>
int effective_n_angular<3>(const RenderSettings& s) {
  return valid_direction_count_3d(s.n_angular > 0 ? s.n_angular : default_subdivision_settings<3>().n_angular);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool wants(ScatterSelect sel, ScatterKind k) {
  return sel == ScatterSelect::both || (sel == ScatterSelect::single) == (k == ScatterKind::single);
}

template <int N>
SubdivisionSettings subdivision_settings(const RenderSettings& s, std::uint64_t seed, bool media) {
  SubdivisionSettings out;
  out.n_angular = effective_n_angular<N>(s);
  out.march_step = s.march_step;
  out.seed = seed;
  out.max_media_bounces = s.max_media_bounces;
  out.media_rings = media;
  return out;
}

template <int N>
struct NewRecords {
  std::optional<CacheRecord<N>> single;
  std::optional<CacheRecord<N>> multiple;
  ElementStats stats;
};

// Records at x for the requested kinds. Our records take their value from
// the stratified direct estimate and their derivatives from the elements.
template <int N>
NewRecords<N> create_records(const Scene<N>& scene, const Vec<N>& x, const RenderSettings& s, std::uint64_t seed,
                             bool need_single, bool need_multiple) {
  NewRecords<N> out;
  const SubdivisionSettings sub = subdivision_settings<N>(s, seed, need_multiple);
  if (s.mode == RenderMode::baseline) {
    const UnawareGradient<N> u = occlusion_unaware_gradient(scene, x, sub);
    const double r_max = 0.25 * scene.scale();
    if (need_single)
      out.single = make_baseline_record(
          x, u.single_value, u.single,
          jarosz_radius(u.single_sum_l, u.single_sum_grad, s.baseline_epsilon, s.baseline_r_min, r_max),
          ScatterKind::single, s.baseline_epsilon);
    if (need_multiple)
      out.multiple = make_baseline_record(
          x, u.multiple_value, u.multiple,
          jarosz_radius(u.multiple_sum_l, u.multiple_sum_grad, s.baseline_epsilon, s.baseline_r_min, r_max),
          ScatterKind::multiple, s.baseline_epsilon);
    return out;
  }
  const RegionParams params = region_params(
      scene, s.epsilon, s.mode == RenderMode::ours_aniso ? RegionMode::anisotropic : RegionMode::isotropic);
  MomentEstimate<N> est = estimate_moments(scene, x, sub);
  out.stats = est.stats;
  if (need_single) {
    est.single.L = est.direct_single;
    out.single = make_record(x, est.single, params);
  }
  if (need_multiple) {
    est.multiple.L = est.direct_multiple;
    out.multiple = make_record(x, est.multiple, params);
  }
  return out;
}

template <int N>
std::optional<Rgb> lookup(const RadianceCache<N>& cache, const Vec<N>& x, RenderMode mode) {
  return mode == RenderMode::baseline ? jarosz_interpolate(cache, x) : interpolate(cache, x);
}

struct CameraFrame {
  Vec3 origin, forward, right, up;
  double tan_half = 1.0;
  double aspect = 1.0;
  int width = 1, height = 1;

  Vec3 direction(double px, double py) const {
    const double sx = (2.0 * px / width - 1.0) * tan_half * aspect;
    const double sy = (1.0 - 2.0 * py / height) * tan_half;
    return normalized(forward + right * sx + up * sy);
  }
};

CameraFrame camera_frame(const Camera& cam, const RenderSettings& s) {
  CameraFrame f;
  f.origin = cam.position;
  f.forward = normalized(cam.look_at - cam.position);
  f.right = normalized(cross(f.forward, cam.up));
  f.up = cross(f.right, f.forward);
  f.tan_half = std::tan(0.5 * cam.fov_deg * std::numbers::pi / 180.0);
  f.width = cam.width;
  f.height = cam.height;
  if (s.resolution > 0 && s.resolution != cam.width) {
    f.width = s.resolution;
    f.height = std::max(1, static_cast<int>(std::lround(double(s.resolution) * cam.height / cam.width)));
  }
  f.aspect = double(f.width) / f.height;
  return f;
}

}  // namespace

template <>
std::vector<Vec2> population_candidates<2>(const Scene<2>& scene, const FieldGrid& grid, const RenderSettings& s) {
  (void)scene;
  std::vector<Vec2> pts;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) pts.push_back(grid.cell_center(i, j));
  Rng rng(stream_seed(s.seed, 0x9091));
  for (std::size_t i = pts.size(); i > 1; --i) std::swap(pts[i - 1], pts[rng.next() % i]);
  return pts;
}

template <>
std::vector<Vec3> population_candidates<3>(const Scene<3>& scene, const Camera& cam, const RenderSettings& s) {
  const CameraFrame f = camera_frame(cam, s);
  if (!scene.bounds().contains(f.origin)) throw Error("camera must lie inside the scene bounds");
  std::vector<Vec3> pts;
  Rng rng(stream_seed(s.seed, 0x9093));
  const int rays = f.width * f.height;
  for (int k = 0; k < rays; ++k) {
    const Vec3 d = f.direction(rng.uniform() * f.width, rng.uniform() * f.height);
    const Hit<3> hit = trace_to_boundary(scene, f.origin, d);
    for (int i = 1; (i - 0.5) * s.march_step < hit.t; ++i) pts.push_back(f.origin + d * ((i - 0.5) * s.march_step));
  }
  return pts;
}

template <int N>
PopulateStats populate_cache(const Scene<N>& scene, const View<N>& view, const RenderSettings& s,
                             CachePair<N>& caches) {
  if (!is_cache_mode(s.mode)) throw Error("populate_cache: mode has no cache");
  const auto t0 = Clock::now();
  PopulateStats st;
  const std::vector<Vec<N>> pts = population_candidates<N>(scene, view, s);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    ++st.candidates;
    const Vec<N>& x = pts[k];
    const Coverage cov_s = coverage(caches.single, x);
    const Coverage cov_m = coverage(caches.multiple, x);
    const bool need_s = wants(s.scatter, ScatterKind::single) && cov_s != Coverage::lit;
    const bool need_m = wants(s.scatter, ScatterKind::multiple) && cov_m != Coverage::lit;
    if (!need_s && !need_m) continue;
    NewRecords<N> rec = create_records(scene, x, s, stream_seed(s.seed, 0x707, k), need_s, need_m);
    st.elements_evaluated += rec.stats.evaluated;
    st.elements_dropped += rec.stats.dropped;
    // A dark point inside a dark region adds nothing.
    if (rec.single && rec.single->is_dark() && cov_s == Coverage::dark) rec.single.reset();
    if (rec.multiple && rec.multiple->is_dark() && cov_m == Coverage::dark) rec.multiple.reset();
    if (rec.single) {
      caches.single.insert(std::move(*rec.single));
      ++st.records_single;
    }
    if (rec.multiple) {
      caches.multiple.insert(std::move(*rec.multiple));
      ++st.records_multiple;
    }
  }
  st.seconds = seconds_since(t0);
  const long n = st.records_single + st.records_multiple;
  st.seconds_per_record = n > 0 ? st.seconds / n : 0.0;
  return st;
}

template <int N>
ScatterSplit quadrature_radiance(const Scene<N>& scene, const Vec<N>& x, const RenderSettings& s) {
  ScatterSplit out;
  const Medium& medium = scene.medium();
  if (medium.sigma_s <= 0.0) return out;
  auto count = [](int n) { return N == 2 ? n : valid_direction_count_3d(n); };
  const int q = count(s.quadrature_angular > 0 ? s.quadrature_angular : (N == 2 ? 8192 : 4096));
  const int q_nested = count(std::max(32, q / 128));
  const double domain = direction_domain_measure<N>();

  auto single_at = [&](const Vec<N>& p, const DirectionSet<N>& dirs, std::vector<double>* dist) {
    Rgb acc;
    for (std::size_t k = 0; k < dirs.directions.size(); ++k) {
      const Hit<N> hit = trace_to_boundary(scene, p, dirs.directions[k]);
      if (dist) (*dist)[k] = hit.t;
      acc += surface_outgoing_radiance(scene, hit) *
             (medium.sigma_s * transmittance(hit.t, medium) * dirs.stratum_measure[k] / domain);
    }
    return acc;
  };

  const DirectionSet<N> dense = stratified_directions<N>(q, 0, false);
  out.single = single_at(x, dense, nullptr);
  if (s.max_media_bounces >= 2) {
    const DirectionSet<N> coarse = stratified_directions<N>(q_nested, 0, false);
    std::vector<double> dist(coarse.directions.size());
    for (std::size_t k = 0; k < coarse.directions.size(); ++k)
      dist[k] = trace_to_boundary(scene, x, coarse.directions[k]).t;
    for (std::size_t k = 0; k < coarse.directions.size(); ++k) {
      for (int i = 1; (i - 0.5) * s.march_step < dist[k]; ++i) {
        const double r = (i - 0.5) * s.march_step;
        const Vec<N> y = x + coarse.directions[k] * r;
        out.multiple += single_at(y, coarse, nullptr) *
                        (s.march_step * medium.sigma_s * transmittance(r, medium) * coarse.stratum_measure[k] / domain);
      }
    }
  }
  return out;
}

namespace {

// In-scattered radiance at one shading point for the selected mode.
template <int N>
ScatterSplit shade(const Scene<N>& scene, const Vec<N>& x, const RenderSettings& s, CachePair<N>* caches,
                   std::uint64_t seed, long samples, bool may_insert, RenderStats& st) {
  ScatterSplit out;
  switch (s.mode) {
    case RenderMode::path:
      out = path_trace_radiance(scene, x, samples, s.max_media_bounces, seed);
      break;
    case RenderMode::quadrature:
      out = quadrature_radiance(scene, x, s);
      break;
    default: {
      const bool ws = wants(s.scatter, ScatterKind::single);
      const bool wm = wants(s.scatter, ScatterKind::multiple);
      std::optional<Rgb> vs = ws ? lookup(caches->single, x, s.mode) : std::optional<Rgb>(Rgb{});
      std::optional<Rgb> vm = wm ? lookup(caches->multiple, x, s.mode) : std::optional<Rgb>(Rgb{});
      if (!vs || !vm) {
        ++st.cache_misses;
        NewRecords<N> rec = create_records(scene, x, s, seed, !vs, !vm);
        if (rec.single) vs = rec.single->moments.L;
        if (rec.multiple) vm = rec.multiple->moments.L;
        if (may_insert) {
          if (rec.single) caches->single.insert(std::move(*rec.single)), ++st.records_added;
          if (rec.multiple) caches->multiple.insert(std::move(*rec.multiple)), ++st.records_added;
        }
      }
      out.single = *vs;
      out.multiple = *vm;
    }
  }
  if (!wants(s.scatter, ScatterKind::single)) out.single = {};
  if (!wants(s.scatter, ScatterKind::multiple)) out.multiple = {};
  return out;
}

RenderOutput field_render(const Scene<2>& scene, const FieldGrid& grid, const RenderSettings& s,
                          CachePair<2>* caches) {
  RenderOutput out{Image(grid.nx, grid.ny), Image(grid.nx, grid.ny), Image(grid.nx, grid.ny), {}};
  const bool serial = is_cache_mode(s.mode) && !s.frozen;
  long misses = 0, added = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : misses, added) if (!serial)
  for (int cell = 0; cell < grid.cells(); ++cell) {
    const int i = cell % grid.nx, j = cell / grid.nx;
    RenderStats local;
    const ScatterSplit v = shade<2>(scene, grid.cell_center(i, j), s, caches,
                                    stream_seed(s.seed, 0xf1e1d, static_cast<std::uint64_t>(cell)), s.spp,
                                    serial, local);
    misses += local.cache_misses;
    added += local.records_added;
    out.single.at(i, j) = v.single;
    out.multiple.at(i, j) = v.multiple;
    out.total.at(i, j) = v.total();
  }
  out.stats.shading_points = grid.cells();
  out.stats.cache_misses = misses;
  out.stats.records_added = added;
  return out;
}

RenderOutput camera_render(const Scene<3>& scene, const Camera& cam, const RenderSettings& s,
                           CachePair<3>* caches) {
  const CameraFrame f = camera_frame(cam, s);
  if (!scene.bounds().contains(f.origin)) throw Error("camera must lie inside the scene bounds");
  RenderOutput out{Image(f.width, f.height), Image(f.width, f.height), Image(f.width, f.height), {}};
  const Medium& medium = scene.medium();
  const bool serial = is_cache_mode(s.mode) && !s.frozen;
  const int pixels = f.width * f.height;
  long misses = 0, added = 0, points = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : misses, added, points) if (!serial)
  for (int px = 0; px < pixels; ++px) {
    const int i = px % f.width, j = px / f.width;
    RenderStats local;
    Rgb single, multiple, surface;
    for (int k = 0; k < s.spp; ++k) {
      Rng rng(stream_seed(s.seed, static_cast<std::uint64_t>(px), static_cast<std::uint64_t>(k)));
      const Vec3 d = f.direction(i + rng.uniform(), j + rng.uniform());
      const Hit<3> hit = trace_to_boundary(scene, f.origin, d);
      for (int m = 1; (m - 0.5) * s.march_step < hit.t; ++m) {
        const double r = (m - 0.5) * s.march_step;
        const std::uint64_t seed =
            stream_seed(s.seed ^ 0x3d3d, static_cast<std::uint64_t>(px) * s.spp + k, static_cast<std::uint64_t>(m));
        const ScatterSplit v = shade<3>(scene, f.origin + d * r, s, caches, seed, 1, serial, local);
        const double w = s.march_step * transmittance(r, medium);
        single += v.single * w;
        multiple += v.multiple * w;
        ++points;
      }
      surface += surface_outgoing_radiance(scene, hit) * transmittance(hit.t, medium);
    }
    const double inv = 1.0 / s.spp;
    out.single.at(i, j) = single * inv;
    out.multiple.at(i, j) = multiple * inv;
    out.total.at(i, j) = (single + multiple + surface) * inv;
    misses += local.cache_misses;
    added += local.records_added;
  }
  out.stats.shading_points = points;
  out.stats.cache_misses = misses;
  out.stats.records_added = added;
  return out;
}

}  // namespace

template <int N>
RenderOutput render(const Scene<N>& scene, const View<N>& view, const RenderSettings& s, CachePair<N>* caches) {
  if (!(s.march_step > 0.0)) throw Error("render: march_step must be positive");
  if (s.spp < 1) throw Error("render: spp must be >= 1");
  if (is_cache_mode(s.mode) && !caches) throw Error("render: cache mode without caches");
  const auto t0 = Clock::now();
  RenderOutput out;
  if constexpr (N == 2)
    out = field_render(scene, view, s, caches);
  else
    out = camera_render(scene, view, s, caches);
  out.stats.seconds = seconds_since(t0);
  return out;
}

template <int N>
FdDerivatives<N> fd_derivatives(const Scene<N>& scene, const Vec<N>& x, double h, long n_samples,
                                std::uint64_t seed, bool with_hessian, int max_media_bounces) {
  if (!(h > 0.0)) throw Error("fd_derivatives: h must be positive");
  auto f = [&](const Vec<N>& p) {
    if (!scene.bounds().contains(p)) throw Error("fd_derivatives: offset leaves the medium");
    return path_trace_radiance(scene, p, n_samples, max_media_bounces, seed);
  };
  FdDerivatives<N> out;
  out.single.kind = ScatterKind::single;
  out.multiple.kind = ScatterKind::multiple;
  auto put_grad = [&](int i, const ScatterSplit& a, const ScatterSplit& b, double scale) {
    for (int c = 0; c < 3; ++c) {
      out.single.grad[c][i] = (a.single[c] - b.single[c]) * scale;
      out.multiple.grad[c][i] = (a.multiple[c] - b.multiple[c]) * scale;
    }
  };
  const ScatterSplit f0 = f(x);
  out.single.L = f0.single;
  out.multiple.L = f0.multiple;
  for (int i = 0; i < N; ++i) {
    const Vec<N> ei = Vec<N>::axis(i) * h;
    const ScatterSplit fp = f(x + ei), fm = f(x - ei);
    put_grad(i, fp, fm, 1.0 / (2.0 * h));
    if (!with_hessian) continue;
    for (int c = 0; c < 3; ++c) {
      out.single.hess[c](i, i) = (fp.single[c] - 2.0 * f0.single[c] + fm.single[c]) / (h * h);
      out.multiple.hess[c](i, i) = (fp.multiple[c] - 2.0 * f0.multiple[c] + fm.multiple[c]) / (h * h);
    }
    for (int j = 0; j < i; ++j) {
      const Vec<N> ej = Vec<N>::axis(j) * h;
      const ScatterSplit pp = f(x + ei + ej), pm = f(x + ei - ej), mp = f(x - ei + ej), mm = f(x - ei - ej);
      for (int c = 0; c < 3; ++c) {
        const double hs = (pp.single[c] - pm.single[c] - mp.single[c] + mm.single[c]) / (4.0 * h * h);
        const double hm = (pp.multiple[c] - pm.multiple[c] - mp.multiple[c] + mm.multiple[c]) / (4.0 * h * h);
        out.single.hess[c](i, j) = out.single.hess[c](j, i) = hs;
        out.multiple.hess[c](i, j) = out.multiple.hess[c](j, i) = hm;
      }
    }
  }
  return out;
}

std::vector<GradientSample> gradient_field(const Scene<2>& scene, const FieldGrid& grid, const RenderSettings& s,
                                           long fd_samples, double fd_h) {
  std::vector<GradientSample> out;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Vec2 x = grid.cell_center(i, j);
      const std::uint64_t seed = stream_seed(s.seed, 0x96ad, static_cast<std::uint64_t>(j * grid.nx + i));
      const SubdivisionSettings sub = subdivision_settings<2>(s, seed, true);
      const MomentEstimate<2> ours = estimate_moments(scene, x, sub);
      const UnawareGradient<2> base = occlusion_unaware_gradient(scene, x, sub);
      const FdDerivatives<2> fd = fd_derivatives(scene, x, fd_h, fd_samples, seed, false, s.max_media_bounces);
      auto lum = [](const std::array<Vec2, 3>& g) {
        Vec2 l;
        for (int c = 0; c < 3; ++c) l += g[c] * kLuminanceWeights[c];
        return l;
      };
      out.push_back({x, ScatterKind::single, ours.direct_single.luminance(), ours.single.luminance_grad(),
                     lum(base.single), fd.single.luminance_grad()});
      out.push_back({x, ScatterKind::multiple, ours.direct_multiple.luminance(), ours.multiple.luminance_grad(),
                     lum(base.multiple), fd.multiple.luminance_grad()});
    }
  }
  return out;
}

ErrorMap error_map(const Image& result, const Image& reference) {
  if (result.width != reference.width || result.height != reference.height)
    throw Error("error_map: resolution mismatch");
  ErrorMap out;
  out.error = Image(result.width, result.height);
  double ref_max = 0.0;
  for (const Rgb& p : reference.pixels) ref_max = std::max(ref_max, p.luminance());
  const double floor = ref_max > 0.0 ? 1e-6 * ref_max : 1e-12;
  std::vector<double> errs;
  for (std::size_t k = 0; k < result.pixels.size(); ++k) {
    const double b = reference.pixels[k].luminance();
    const double e = std::abs(result.pixels[k].luminance() - b) / std::max(b, floor);
    out.error.pixels[k] = Rgb::gray(e);
    errs.push_back(e);
  }
  if (errs.empty()) return out;
  double sum = 0.0;
  for (double e : errs) sum += e;
  out.mean = sum / errs.size();
  const std::size_t k95 = std::min(errs.size() - 1, static_cast<std::size_t>(std::ceil(0.95 * errs.size())) - 1);
  std::nth_element(errs.begin(), errs.begin() + k95, errs.end());
  out.p95 = errs[k95];
  return out;
}

template CachePair<2> make_cache_pair(const Scene<2>&);
template CachePair<3> make_cache_pair(const Scene<3>&);
template PopulateStats populate_cache(const Scene<2>&, const FieldGrid&, const RenderSettings&, CachePair<2>&);
template PopulateStats populate_cache(const Scene<3>&, const Camera&, const RenderSettings&, CachePair<3>&);
template RenderOutput render(const Scene<2>&, const FieldGrid&, const RenderSettings&, CachePair<2>*);
template RenderOutput render(const Scene<3>&, const Camera&, const RenderSettings&, CachePair<3>*);
template ScatterSplit quadrature_radiance(const Scene<2>&, const Vec2&, const RenderSettings&);
template ScatterSplit quadrature_radiance(const Scene<3>&, const Vec3&, const RenderSettings&);
template FdDerivatives<2> fd_derivatives(const Scene<2>&, const Vec2&, double, long, std::uint64_t, bool, int);
template FdDerivatives<3> fd_derivatives(const Scene<3>&, const Vec3&, double, long, std::uint64_t, bool, int);

}  // namespace vrc
