// Acceptance run: one PASS/FAIL line per criterion, INFO lines for
// measurements that are reported but not gated. Exit status is the number of
// failed criteria (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vrc/cache.hpp"
#include "vrc/cli.hpp"
#include "vrc/formfactor.hpp"
#include "vrc/renderer.hpp"
#include "vrc/rng.hpp"
#include "vrc/scene_io.hpp"
#include "vrc/subdivision.hpp"
#include "vrc/transport.hpp"

using namespace vrc;

namespace {

std::string g_scenes = "scenes";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& s) { std::cout << "INFO " << s << std::endl; }

template <int N>
SceneFile<N> load(const std::string& name) {
  return std::get<SceneFile<N>>(load_scene(g_scenes + "/" + name + ".json"));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 1. Transmittance derivatives against central differences of exp(-sigma_t d).
Outcome transmittance_derivatives() {
  Rng rng(101);
  double worst = 0.0;
  int configs = 0;
  auto run = [&]<int N>() {
    while (configs < (N == 2 ? 50 : 100)) {
      Vec<N> x, y;
      for (int i = 0; i < N; ++i) {
        x[i] = rng.uniform(-1, 1);
        y[i] = rng.uniform(-1, 1);
      }
      if (norm(x - y) < 0.1) continue;
      const Medium m{rng.uniform(0.05, 2.0), rng.uniform(0.0, 1.0)};
      const auto d = transmittance_derivs(x, y, m);
      std::function<double(const Vec<N>&)> f = [&](const Vec<N>& p) { return oracle::transmittance(p, y, m.sigma_t()); };
      worst = std::max({worst, oracle::rel_err(d.grad, oracle::fd_gradient(f, x, 1e-5)),
                        oracle::rel_err(d.hess, oracle::fd_hessian(f, x, 1e-4))});
      ++configs;
    }
  };
  run.operator()<2>();
  run.operator()<3>();
  return {worst <= 1e-4, fmt("%d configs (50 in 2D, 50 in 3D), worst relative error %.2e", configs, worst)};
}

// 2. Flatland form factor.
Outcome formfactor_2d() {
  const double quarter = std::abs(ff_segment_value({0, 0}, {1, 0}, {0, 1}) - 0.25);
  Rng rng(202);
  double enclosure = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 10;
    std::vector<Vec2> poly;
    for (int i = 0; i < n; ++i) {
      const double a = 2 * std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / n;
      poly.push_back({std::cos(a) * 1.5, std::sin(a)});
    }
    const Vec2 x{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += ff_segment_value(x, poly[i], poly[(i + 1) % n]);
    enclosure = std::max(enclosure, std::abs(sum - 1.0));
  }
  double worst = 0.0, worst_value = 0.0;
  int configs = 0;
  while (configs < 500) {
    const Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec2 y0{rng.uniform(-1, 1), rng.uniform(-1, 1)}, y1{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    if (std::abs(cross(y0 - x, y1 - x)) < 0.05 || norm(y0 - x) < 0.2 || norm(y1 - x) < 0.2) continue;
    const auto d = try_ff_segment_derivs(x, y0, y1);
    if (!d) continue;
    std::function<double(const Vec2&)> f = [&](const Vec2& p) { return oracle::ff_segment_acos(p, y0, y1); };
    worst_value = std::max(worst_value, std::abs(d->value - oracle::ff_segment(x, y0, y1, 512)));
    worst = std::max({worst, oracle::rel_err(d->grad, oracle::fd_gradient(f, x, 1e-5)),
                      oracle::rel_err(d->hess, oracle::fd_hessian(f, x, 1e-4))});
    ++configs;
  }
  const bool pass = quarter <= 1e-12 && enclosure <= 1e-9 && worst <= 1e-3 && worst_value <= 1e-9;
  return {pass, fmt("quarter circle |F-0.25| %.1e, polygon enclosure |sum-1| %.1e, %d configs: value vs "
                    "integration %.1e, derivatives vs FD %.2e",
                    quarter, enclosure, configs, worst_value, worst)};
}

// 3. Triangle solid angle.
Outcome formfactor_3d() {
  const double octant = std::abs(solid_angle_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}).omega -
                                 std::numbers::pi / 2);
  Rng rng(303);
  double tetra = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::array<Vec3, 4> v{Vec3{1, 1, 1}, Vec3{1, -1, -1}, Vec3{-1, 1, -1}, Vec3{-1, -1, 1}};
    for (auto& p : v)
      for (int i = 0; i < 3; ++i) p[i] += rng.uniform(-0.2, 0.2);
    const Vec3 x{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)};
    const double sum = solid_angle_triangle(x, v[0], v[1], v[2]).omega + solid_angle_triangle(x, v[0], v[2], v[3]).omega +
                       solid_angle_triangle(x, v[0], v[3], v[1]).omega + solid_angle_triangle(x, v[1], v[3], v[2]).omega;
    tetra = std::max(tetra, std::abs(sum - 4 * std::numbers::pi));
  }
  double worst = 0.0, worst_value = 0.0, jac = 0.0;
  int configs = 0;
  const double h = 1e-4;
  while (configs < 500) {
    const Vec3 x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::array<Vec3, 3> p;
    for (auto& q : p) q = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double vol = std::abs(dot(p[0] - x, cross(p[1] - x, p[2] - x)));
    if (vol < 0.05 || norm(p[0] - x) < 0.2 || norm(p[1] - x) < 0.2 || norm(p[2] - x) < 0.2) continue;
    const auto d = try_ff_triangle_derivs(x, p[0], p[1], p[2]);
    if (!d) continue;
    std::function<double(const Vec3&)> f = [&](const Vec3& q) {
      return oracle::solid_angle_lhuilier(q, p[0], p[1], p[2]) / (4 * std::numbers::pi);
    };
    worst_value = std::max(worst_value, std::abs(d->value - f(x)));
    worst = std::max({worst, oracle::rel_err(d->grad, oracle::fd_gradient(f, x, 1e-5)),
                      oracle::rel_err(d->hess, oracle::fd_hessian(f, x, 1e-4))});
    // Jacobian of grad A by central differences, in units of ||grad A|| / h.
    const Vec3 g0 = solid_angle_triangle(x, p[0], p[1], p[2]).terms.gradA;
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = Vec3::axis(i) * h;
      const Vec3 gp = solid_angle_triangle(x + e, p[0], p[1], p[2]).terms.gradA;
      const Vec3 gm = solid_angle_triangle(x - e, p[0], p[1], p[2]).terms.gradA;
      for (int j = 0; j < 3; ++j) jac = std::max(jac, std::abs(gp[j] - gm[j]) / (2 * h) / (norm(g0) / h));
    }
    ++configs;
  }
  const bool pass = octant <= 1e-12 && tetra <= 1e-9 && worst <= 1e-3 && worst_value <= 1e-9 && jac <= 1e-6;
  return {pass, fmt("octant |omega-pi/2| %.1e, tetrahedron |sum-4pi| %.1e, %d configs: value vs spherical excess "
                    "%.1e, derivatives vs FD %.2e, max |J(grad A)| %.1e x ||grad A||/h",
                    octant, tetra, configs, worst_value, worst, jac)};
}

// 4. Single-scattering gradient convergence in the penumbra scene.
Outcome gradient_convergence() {
  const auto sf = load<2>("penumbra");
  const Scene<2>& scene = sf.scene;
  const long fd_samples = 16000000;
  const double h = 0.01;
  std::vector<Vec2> pts;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 4; ++i) pts.push_back({-0.25 + 0.2 * i, -0.15 - 0.25 * j});
  std::vector<Vec2> refs;
  for (std::size_t k = 0; k < pts.size(); ++k)
    refs.push_back(fd_derivatives(scene, pts[k], h, fd_samples, stream_seed(404, k), false, 1).single.luminance_grad());
  const std::vector<int> levels{256, 1024, 4096};
  std::vector<double> med;
  double med_base = 0.0;
  for (int n : levels) {
    std::vector<double> ours, base;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      SubdivisionSettings s;
      s.n_angular = n;
      s.seed = stream_seed(405, k);
      s.media_rings = false;
      ours.push_back(oracle::rel_err(estimate_moments(scene, pts[k], s).single.luminance_grad(), refs[k]));
      if (n == levels.back()) {
        const UnawareGradient<2> u = occlusion_unaware_gradient(scene, pts[k], s);
        Vec2 g;
        for (int c = 0; c < 3; ++c) g += u.single[c] * kLuminanceWeights[c];
        base.push_back(oracle::rel_err(g, refs[k]));
      }
    }
    med.push_back(median(ours));
    if (!base.empty()) med_base = median(base);
    info(fmt("criterion 4: n_angular %d median relative gradient error %.4f", n, med.back()));
  }
  const bool pass = med[1] <= med[0] && med[2] <= med[1] && med[2] < med_base;
  return {pass, fmt("%zu penumbra points, median error %.4f -> %.4f -> %.4f, occlusion-unaware %.4f at 4096",
                    pts.size(), med[0], med[1], med[2], med_base)};
}

// Random symmetric matrix with prescribed eigenvalues.
template <int N>
Mat<N> rotated(const std::array<double, N>& eig, Rng& rng) {
  Mat<N> a;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1, 1);
  const EigenSystem<N> basis = eigen_sym(a);
  Mat<N> m;
  for (int i = 0; i < N; ++i) m += outer(basis.vectors[i], basis.vectors[i]) * eig[i];
  return symmetrized(m);
}

// Midpoint integral of |lambda| u^2 / L over the ball of radius R around the
// record, on a Cartesian grid that is independent of the radius formula.
double axis_ball_integral(int dim, double lambda, double L, double R, int n) {
  const double cell = 2.0 * R / n;
  double sum = 0.0;
  if (dim == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = -R + (i + 0.5) * cell, v = -R + (j + 0.5) * cell;
        if (u * u + v * v <= R * R) sum += std::abs(lambda) * u * u / L;
      }
    return sum * cell * cell;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double u = -R + (i + 0.5) * cell, v = -R + (j + 0.5) * cell, w = -R + (k + 0.5) * cell;
        if (u * u + v * v + w * w <= R * R) sum += std::abs(lambda) * u * u / L;
      }
  return sum * cell * cell * cell;
}

// Full density |d^T H d| / (2 L) over the anisotropic region.
template <int N>
double region_integral(const CacheRecord<N>& r, const Mat<N>& H, double L, int n) {
  Vec<N> lo, hi;
  for (int i = 0; i < N; ++i) {
    lo[i] = r.position[i] - r.max_radius();
    hi[i] = r.position[i] + r.max_radius();
  }
  const double cell = 2.0 * r.max_radius() / n;
  double sum = 0.0;
  std::array<int, N> idx{};
  const long total = static_cast<long>(std::pow(n, N));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    Vec<N> p;
    for (int i = 0; i < N; ++i) {
      idx[i] = static_cast<int>(rem % n);
      rem /= n;
      p[i] = lo[i] + (idx[i] + 0.5) * cell;
    }
    if (!r.contains(p)) continue;
    const Vec<N> d = p - r.position;
    sum += std::abs(dot(d, H * d)) / (2.0 * L);
  }
  return sum * std::pow(cell, N);
}

template <int N>
void metric_fields(Rng& rng, int count, double& worst_axis, double& worst_taylor, std::vector<double>& iso_ratio,
                   std::vector<double>& aniso_ratio) {
  const double eps = 0.01;
  for (int f = 0; f < count; ++f) {
    const double L = rng.uniform(0.5, 5.0);
    std::array<double, N> eig;
    for (int i = 0; i < N; ++i) eig[i] = (rng.uniform() < 0.5 ? -1 : 1) * std::pow(10.0, rng.uniform(-1, 2));
    const Mat<N> H = rotated<N>(eig, rng);
    Vec<N> g;
    for (int i = 0; i < N; ++i) g[i] = rng.uniform(-1, 1);
    Moments<N> m;
    m.L = Rgb::gray(L);
    for (int c = 0; c < 3; ++c) {
      m.grad[c] = g;
      m.hess[c] = H;
    }
    RegionParams params;
    params.epsilon = eps;
    params.mode = RegionMode::anisotropic;
    params.lambda_min = 1e-12;
    params.r_max = 1e6;
    params.l_floor = 1e-12;
    const CacheRecord<N> rec = make_record<N>(Vec<N>{}, m, params);
    for (int i = 0; i < N; ++i) {
      const double integral = axis_ball_integral(N, rec.eigen.values[i], L, rec.radii[i], N == 2 ? 400 : 80);
      worst_axis = std::max(worst_axis, std::abs(integral / eps - 1.0));
    }
    // Extrapolation error against the second-order prediction.
    RadianceCache<N> cache(Bounds<N>{Vec<N>::filled(-10), Vec<N>::filled(10)}, ScatterKind::single);
    cache.insert(rec);
    for (int q = 0; q < 20; ++q) {
      Vec<N> d;
      for (int i = 0; i < N; ++i) d += rec.eigen.vectors[i] * (rng.uniform(-0.7, 0.7) * rec.radii[i] / std::sqrt(N));
      const double truth = L + dot(g, d) + 0.5 * dot(d, H * d);
      const double first = L + dot(g, d);
      if (first <= 0.0) continue;
      const auto got = interpolate(cache, d);
      const double predicted = 0.5 * dot(d, H * d);
      worst_taylor = std::max(worst_taylor, std::abs((truth - (*got)[0]) - predicted) / L);
    }
    if (f < 10) {
      const int n = N == 2 ? 300 : 60;
      aniso_ratio.push_back(region_integral(rec, H, L, n) / eps);
      CacheRecord<N> iso = rec;
      const double iso_r = N == 2 ? std::pow(4 * L * eps / (std::numbers::pi * std::abs(eig[0])), 0.25)
                                  : std::pow(15 * L * eps / (4 * std::numbers::pi * std::abs(eig[0])), 0.2);
      iso.radii.fill(iso_r);
      Mat<N> Hiso = Mat<N>::identity() * eig[0];
      iso_ratio.push_back(region_integral(iso, Hiso, L, n) / eps);
    }
  }
}

// 5. Error-metric consistency on synthetic quadratic fields.
Outcome metric_consistency() {
  Rng rng(505);
  double axis2 = 0, axis3 = 0, taylor = 0;
  std::vector<double> iso2, an2, iso3, an3;
  metric_fields<2>(rng, 50, axis2, taylor, iso2, an2);
  metric_fields<3>(rng, 50, axis3, taylor, iso3, an3);
  auto range = [](const std::vector<double>& v) {
    return fmt("[%.3f, %.3f]", *std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end()));
  };
  info("criterion 5: full density |d^T H d|/(2L) over the region, divided by eps: 2D isotropic " + range(iso2) +
       ", 2D anisotropic " + range(an2) + ", 3D isotropic " + range(iso3) + ", 3D anisotropic " + range(an3));
  const bool pass = axis2 <= 0.05 && axis3 <= 0.05 && taylor <= 1e-9;
  return {pass, fmt("50 fields per dimension: per-axis bound integral recovers eps within %.2f%% (2D) and %.2f%% "
                    "(3D); Taylor residual %.1e",
                    100 * axis2, 100 * axis3, taylor)};
}

long populate_points(const Scene<2>& scene, RenderMode mode, double eps, int res, int n_angular, double base_eps = 0.25,
                     ScatterSelect sel = ScatterSelect::both, CachePair<2>* keep = nullptr) {
  RenderSettings s;
  s.mode = mode;
  s.epsilon = eps;
  s.baseline_epsilon = base_eps;
  s.n_angular = n_angular;
  s.resolution = res;
  s.scatter = sel;
  s.seed = 606;
  CachePair<2> caches = make_cache_pair(scene);
  const PopulateStats ps = populate_cache<2>(scene, make_field_grid(scene, res), s, caches);
  if (keep) *keep = std::move(caches);
  return ps.records_single + ps.records_multiple;
}

// 6. Anisotropic regions need fewer points.
Outcome anisotropic_reduction() {
  const auto sq = load<2>("square_emitter");
  const double eps = 5e-5;
  const long iso = populate_points(sq.scene, RenderMode::ours_iso, eps, 64, 256);
  const long an = populate_points(sq.scene, RenderMode::ours_aniso, eps, 64, 256);
  const double red = 1.0 - double(an) / double(iso);
  const auto cs = load<2>("cross_shadows");
  const long iso_c = populate_points(cs.scene, RenderMode::ours_iso, eps, 64, 256);
  const long an_c = populate_points(cs.scene, RenderMode::ours_aniso, eps, 64, 256);
  const double red_c = 1.0 - double(an_c) / double(iso_c);
  return {red >= 0.15 && red_c >= 0.25,
          fmt("square emitter eps %.1e: %ld isotropic vs %ld anisotropic points (%.1f%% fewer, gate 15%%); "
              "cross shadows: %ld vs %ld (%.1f%% fewer, gate 25%%)",
              eps, iso, an, 100 * red, iso_c, an_c, 100 * red_c)};
}

// 7. Ours versus the occlusion-unaware baseline at matched point counts.
Outcome occlusion_quality() {
  bool all = true;
  std::string detail;
  for (const char* name : {"cross_shadows", "strips"}) {
    const auto sf = load<2>(name);
    const Scene<2>& scene = sf.scene;
    const int pop_res = 48, eval_res = 40, n_ang = 512;
    const double eps = 2e-3;
    RenderSettings s;
    s.scatter = ScatterSelect::single;
    s.n_angular = n_ang;
    s.seed = 707;
    s.resolution = eval_res;
    const FieldGrid eval = make_field_grid(scene, eval_res);
    s.mode = RenderMode::quadrature;
    s.quadrature_angular = 8192;
    const RenderOutput ref = render<2>(scene, eval, s, nullptr);

    CachePair<2> ours = make_cache_pair(scene);
    const long n_ours = populate_points(scene, RenderMode::ours_iso, eps, pop_res, n_ang, 0.25, ScatterSelect::single, &ours);
    // Bisect the baseline tolerance (log scale) until its point count matches.
    double lo = 1e-3, hi = 4.0;
    CachePair<2> base = make_cache_pair(scene);
    long n_base = 0;
    double alpha = 0.0;
    for (int it = 0; it < 40; ++it) {
      alpha = std::sqrt(lo * hi);
      CachePair<2> c = make_cache_pair(scene);
      n_base = populate_points(scene, RenderMode::baseline, eps, pop_res, n_ang, alpha, ScatterSelect::single, &c);
      base = std::move(c);
      if (std::abs(double(n_base) / n_ours - 1.0) <= 0.05) break;
      (n_base > n_ours ? lo : hi) = alpha;
    }
    const bool matched = std::abs(double(n_base) / n_ours - 1.0) <= 0.05;
    s.mode = RenderMode::ours_iso;
    s.epsilon = eps;
    const ErrorMap e_ours = error_map(render<2>(scene, eval, s, &ours).single, ref.single);
    s.mode = RenderMode::baseline;
    s.baseline_epsilon = alpha;
    const ErrorMap e_base = error_map(render<2>(scene, eval, s, &base).single, ref.single);
    const bool ok = matched && e_ours.mean < e_base.mean;
    all = all && ok;
    info(fmt("criterion 7: %s ours eps %.0e %ld points, mean %.4f p95 %.4f; baseline alpha %.4f %ld points, mean %.4f "
             "p95 %.4f",
             name, eps, n_ours, e_ours.mean, e_ours.p95, alpha, n_base, e_base.mean, e_base.p95));
    detail += fmt("%s%s: ours %.4f vs baseline %.4f at %ld/%ld points", detail.empty() ? "" : "; ", name, e_ours.mean,
                  e_base.mean, n_ours, n_base);
  }
  return {all, "mean relative single-scattering field error, " + detail};
}

// 8. Tree query against a linear scan.
Outcome index_exactness() {
  Rng rng(808);
  long mismatches = 0;
  auto run = [&]<int N>() {
    RadianceCache<N> cache(Bounds<N>{Vec<N>::filled(-1), Vec<N>::filled(1)}, ScatterKind::single);
    for (int k = 0; k < 1000; ++k) {
      Vec<N> x;
      for (int i = 0; i < N; ++i) x[i] = rng.uniform(-1, 1);
      std::array<double, N> eig;
      for (int i = 0; i < N; ++i) eig[i] = std::pow(10.0, rng.uniform(0, 6));
      Moments<N> m;
      m.L = Rgb::gray(1.0);
      for (int c = 0; c < 3; ++c) m.hess[c] = rotated<N>(eig, rng);
      RegionParams p;
      p.epsilon = 0.05;
      p.mode = k % 2 ? RegionMode::anisotropic : RegionMode::isotropic;
      p.lambda_min = 1e-12;
      p.r_max = 0.5;
      cache.insert(make_record<N>(x, m, p));
    }
    for (int q = 0; q < 1000; ++q) {
      Vec<N> p;
      for (int i = 0; i < N; ++i) p[i] = rng.uniform(-1.05, 1.05);
      if (cache.query(p) != cache.linear_scan(p)) ++mismatches;
    }
  };
  run.operator()<2>();
  run.operator()<3>();
  return {mismatches == 0, fmt("1000 records x 1000 queries in 2D and 3D, %ld mismatches", mismatches)};
}

// 9. Joint refinement of angular and marching resolution on an unoccluded scene.
Outcome estimator_consistency() {
  const auto sf = load<2>("smooth");
  const Scene<2>& scene = sf.scene;
  const std::vector<Vec2> pts{{-0.5, -0.4}, {0.0, 0.1}, {0.4, -0.6}, {0.6, 0.3}, {-0.3, 0.5}};
  std::vector<ScatterSplit> ref;
  for (std::size_t k = 0; k < pts.size(); ++k)
    ref.push_back(path_trace_radiance(scene, pts[k], 4000000, 2, stream_seed(909, k)));
  const std::vector<std::pair<int, double>> levels{{64, 0.2}, {256, 0.1}, {1024, 0.05}};
  std::vector<double> err;
  for (const auto& [n, step] : levels) {
    double e = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      SubdivisionSettings s;
      s.n_angular = n;
      s.march_step = step;
      s.seed = stream_seed(910, k);
      const MomentEstimate<2> m = estimate_moments(scene, pts[k], s);
      const double L = m.single.L.luminance() + m.multiple.L.luminance();
      e += std::abs(L - ref[k].total().luminance()) / ref[k].total().luminance();
    }
    err.push_back(e / pts.size());
    info(fmt("criterion 9: n_angular %d march_step %.3f mean relative |L - path traced| %.5f", n, step, err.back()));
  }
  const bool pass = err[1] < err[0] && err[2] < err[1];
  return {pass, fmt("%zu points, mean relative error %.5f -> %.5f -> %.5f", pts.size(), err[0], err[1], err[2])};
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// 10. The render command is bit-identical across two runs in every mode.
Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "vrc_acceptance_det";
  std::filesystem::create_directories(dir);
  int identical = 0, total = 0;
  std::string bad;
  struct Case {
    const char* scene;
    std::vector<std::string> extra;
  };
  const std::vector<Case> cases{{"penumbra", {"--resolution", "12", "--n-angular", "128"}},
                                {"box3d", {"--resolution", "6", "--n-angular", "64", "--march-step", "0.4"}}};
  for (const auto& c : cases) {
    for (const char* mode : {"ours-iso", "ours-aniso", "baseline", "path", "quadrature"}) {
      std::string files[2];
      for (int run = 0; run < 2; ++run) {
        const std::string prefix = (dir / (std::string(c.scene) + "_" + mode + "_" + std::to_string(run))).string();
        std::vector<std::string> args{"vrc",    "render", "--scene", g_scenes + "/" + c.scene + ".json",
                                      "--mode", mode,     "--seed",  "7",
                                      "--spp",  "1",      "--out",   prefix};
        args.insert(args.end(), c.extra.begin(), c.extra.end());
        if (run_cli(args) != kExitOk) return {false, std::string("render failed for ") + c.scene + " " + mode};
        files[run] = slurp(prefix + ".pfm") + slurp(prefix + ".ppm") + slurp(prefix + "_stats.json");
      }
      ++total;
      if (!files[0].empty() && files[0] == files[1])
        ++identical;
      else
        bad += std::string(" ") + c.scene + "/" + mode;
    }
  }
  std::filesystem::remove_all(dir);
  return {identical == total,
          fmt("%d/%d scene-mode pairs produce identical images and stats", identical, total) + bad};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--scenes" && i + 1 < argc)
      g_scenes = argv[++i];
    else if (a == "--only" && i + 1 < argc)
      only.insert(std::stoi(argv[++i]));
  }
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "transmittance derivatives", 1, transmittance_derivatives},
      {2, "2D form factor", 10, formfactor_2d},
      {3, "3D form factor", 30, formfactor_3d},
      {4, "gradient convergence", 600, gradient_convergence},
      {5, "error-metric consistency", 60, metric_consistency},
      {6, "anisotropic reduction", 300, anisotropic_reduction},
      {7, "occlusion-quality inequality", 900, occlusion_quality},
      {8, "spatial-index exactness", 5, index_exactness},
      {9, "estimator consistency", 300, estimator_consistency},
      {10, "end-to-end determinism", 120, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = t < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "CRITERION " << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
              << fmt(" [%.1f s of %.0f s%s]", t, c.budget_s, in_time ? "" : ", over budget") << std::endl;
  }
  std::cout << (failed ? "ACCEPTANCE FAIL " : "ACCEPTANCE PASS ") << failed << " failed" << std::endl;
  return failed ? 1 : 0;
}
