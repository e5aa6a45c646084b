#include "vrc/validation.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "vrc/cache.hpp"
#include "vrc/formfactor.hpp"
#include "vrc/subdivision.hpp"
#include "vrc/transport.hpp"

namespace vrc {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* label, double v) {
  std::ostringstream os;
  os << label << '=' << v;
  return os.str();
}

template <int N>
Vec<N> random_vec(Rng& rng, double lo, double hi) {
  Vec<N> v;
  for (int i = 0; i < N; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

// Worst relative mismatch of (grad, hess) against central differences of
// (value, grad) over `trials` random configurations.
template <int N>
struct DerivCheck {
  double grad = 0.0;
  double hess = 0.0;
  int used = 0;
};

template <int N, class Sample>
DerivCheck<N> fd_check(int trials, double h, Rng& rng, Sample sample) {
  DerivCheck<N> out;
  for (int t = 0; t < trials; ++t) {
    // sample(rng) returns a callable p -> optional<(value, grad, hess)> and a point.
    auto [eval, x] = sample(rng);
    const auto c = eval(x);
    if (!c) continue;
    Vec<N> g_fd;
    Mat<N> h_fd;
    bool ok = true;
    for (int i = 0; i < N && ok; ++i) {
      const Vec<N> e = Vec<N>::axis(i) * h;
      const auto p = eval(x + e), m = eval(x - e);
      if (!p || !m) {
        ok = false;
        break;
      }
      g_fd[i] = (p->value - m->value) / (2.0 * h);
      for (int j = 0; j < N; ++j) h_fd(i, j) = (p->grad[j] - m->grad[j]) / (2.0 * h);
    }
    if (!ok) continue;
    ++out.used;
    out.grad = std::max(out.grad, norm(g_fd - c->grad) / std::max(norm(c->grad), 1e-300));
    out.hess = std::max(out.hess, frobenius_norm(h_fd - c->hess) / std::max(frobenius_norm(c->hess), 1e-300));
  }
  return out;
}

void suite_transmittance(std::vector<CheckResult>& out, Rng& rng) {
  auto run = [&](auto dim_tag) {
    constexpr int N = decltype(dim_tag)::value;
    auto res = fd_check<N>(100, 1e-5, rng, [](Rng& r) {
      const Vec<N> y = random_vec<N>(r, -1.0, 1.0);
      Vec<N> x = random_vec<N>(r, -1.0, 1.0);
      if (norm(x - y) < 0.2) x += Vec<N>::filled(0.3);
      const Medium m{r.uniform(0.0, 2.0), r.uniform(0.0, 1.0)};
      auto eval = [y, m](const Vec<N>& p) { return std::optional(transmittance_derivs(p, y, m)); };
      return std::pair{eval, x};
    });
    out.push_back({"transmittance", std::to_string(N) + "D gradient vs central differences", res.grad <= 1e-4,
                   fmt("max_rel_err", res.grad)});
    out.push_back({"transmittance", std::to_string(N) + "D Hessian vs central differences", res.hess <= 1e-4,
                   fmt("max_rel_err", res.hess)});
  };
  run(std::integral_constant<int, 2>{});
  run(std::integral_constant<int, 3>{});
}

void suite_formfactor(std::vector<CheckResult>& out, Rng& rng) {
  const double quarter = ff_segment_value({0, 0}, {1, 0}, {0, 1});
  out.push_back({"formfactor", "2D quarter circle", std::abs(quarter - 0.25) <= 1e-12, fmt("F", quarter)});

  double sum = 0.0;
  const int sides = 7;
  const Vec2 inside{0.13, -0.21};
  for (int k = 0; k < sides; ++k) {
    const double a0 = 2 * kPi * k / sides, a1 = 2 * kPi * (k + 1) / sides;
    sum += ff_segment_value(inside, {std::cos(a0), std::sin(a0)}, {std::cos(a1), std::sin(a1)});
  }
  out.push_back({"formfactor", "2D convex polygon enclosure sums to 1", std::abs(sum - 1.0) <= 1e-9,
                 fmt("sum", sum)});

  auto seg = fd_check<2>(500, 1e-5, rng, [](Rng& r) {
    const Vec2 a = random_vec<2>(r, -1, 1), b = random_vec<2>(r, -1, 1);
    auto eval = [a, b](const Vec2& p) { return try_ff_segment_derivs(p, a, b); };
    return std::pair{eval, random_vec<2>(r, -1, 1)};
  });
  out.push_back({"formfactor", "2D gradient vs central differences", seg.grad <= 1e-3 && seg.used > 400,
                 fmt("max_rel_err", seg.grad) + " " + fmt("configs", seg.used)});
  out.push_back({"formfactor", "2D Hessian vs central differences", seg.hess <= 1e-3 && seg.used > 400,
                 fmt("max_rel_err", seg.hess)});

  const double octant = solid_angle_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}).omega;
  out.push_back({"formfactor", "3D octant triangle", std::abs(octant - kPi / 2) <= 1e-12, fmt("omega", octant)});

  const Vec3 t[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  const Vec3 c{0.1, -0.05, 0.2};
  const double total = solid_angle_triangle(c, t[0], t[1], t[2]).omega + solid_angle_triangle(c, t[0], t[1], t[3]).omega +
                       solid_angle_triangle(c, t[0], t[2], t[3]).omega + solid_angle_triangle(c, t[1], t[2], t[3]).omega;
  out.push_back({"formfactor", "3D tetrahedron enclosure sums to 4 pi", std::abs(total - 4 * kPi) <= 1e-9,
                 fmt("sum", total)});

  auto tri = fd_check<3>(500, 1e-5, rng, [](Rng& r) {
    const Vec3 a = random_vec<3>(r, -1, 1), b = random_vec<3>(r, -1, 1), d = random_vec<3>(r, -1, 1);
    auto eval = [a, b, d](const Vec3& p) { return try_ff_triangle_derivs(p, a, b, d); };
    return std::pair{eval, random_vec<3>(r, -1, 1)};
  });
  out.push_back({"formfactor", "3D gradient vs central differences", tri.grad <= 1e-3 && tri.used > 400,
                 fmt("max_rel_err", tri.grad) + " " + fmt("configs", tri.used)});
  out.push_back({"formfactor", "3D Hessian vs central differences", tri.hess <= 1e-3 && tri.used > 400,
                 fmt("max_rel_err", tri.hess)});

  double worst = 0.0;
  const double h = 1e-4;
  for (int k = 0; k < 100; ++k) {
    const Vec3 a = random_vec<3>(rng, -1, 1), b = random_vec<3>(rng, -1, 1), d = random_vec<3>(rng, -1, 1);
    const Vec3 x = random_vec<3>(rng, -1, 1);
    const Vec3 g0 = solid_angle_triangle(x, a, b, d).terms.gradA;
    for (int i = 0; i < 3; ++i) {
      const Vec3 e = Vec3::axis(i) * h;
      const Vec3 jcol = (solid_angle_triangle(x + e, a, b, d).terms.gradA -
                         solid_angle_triangle(x - e, a, b, d).terms.gradA) / (2 * h);
      worst = std::max(worst, norm(jcol) * h / std::max(norm(g0), 1e-300));
    }
  }
  out.push_back({"formfactor", "Jacobian of grad A vanishes", worst <= 1e-6, fmt("max_scaled_entry", worst)});
}

// Closed emitting enclosure in a nearly transparent medium: S / sigma_s is the
// constant emitted radiance, so the gradient and Hessian vanish.
void suite_subdivision(std::vector<CheckResult>& out, Rng&) {
  std::vector<Surface<2>> walls;
  const int sides = 24;
  for (int k = 0; k < sides; ++k) {
    const double a0 = 2 * kPi * k / sides, a1 = 2 * kPi * (k + 1) / sides;
    walls.push_back({{Vec2{std::cos(a0), std::sin(a0)}, Vec2{std::cos(a1), std::sin(a1)}}, Rgb::gray(1.0), {}});
  }
  const Scene<2> scene(walls, Medium{1e-6, 0.0}, Bounds<2>{{-1.1, -1.1}, {1.1, 1.1}});
  SubdivisionSettings s;
  s.n_angular = 1024;
  s.media_rings = false;
  double worst_g = 0.0, worst_h = 0.0, worst_l = 0.0;
  for (const Vec2 x : {Vec2{0, 0}, Vec2{0.3, -0.2}, Vec2{-0.5, 0.4}}) {
    const MomentEstimate<2> m = estimate_moments(scene, x, s);
    const double l = m.single.L[0] / 1e-6;
    worst_l = std::max(worst_l, std::abs(l - 1.0));
    worst_g = std::max(worst_g, norm(m.single.grad[0]) / m.single.L[0]);
    worst_h = std::max(worst_h, frobenius_norm(m.single.hess[0]) / m.single.L[0]);
  }
  out.push_back({"subdivision", "enclosure radiance equals emission", worst_l <= 1e-5, fmt("max_rel_err", worst_l)});
  out.push_back({"subdivision", "enclosure gradient vanishes", worst_g <= 1e-5, fmt("max_rel_grad", worst_g)});
  out.push_back({"subdivision", "enclosure Hessian vanishes", worst_h <= 1e-5, fmt("max_rel_hess", worst_h)});
}

// Integral of |lambda_i| (v_i . d)^2 / L over the disk / ball of radius R_i,
// by midpoint quadrature in polar / spherical coordinates.
double axis_error_integral(int dim, double lambda, double L, double R) {
  const int n = 200;
  double sum = 0.0;
  if (dim == 2) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double r = (a + 0.5) * R / n, th = (b + 0.5) * 2 * kPi / n;
        const double x = r * std::cos(th);
        sum += x * x * r * (R / n) * (2 * kPi / n);
      }
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double r = (a + 0.5) * R / n, th = (b + 0.5) * kPi / n;
        const double z = r * std::cos(th);
        // The azimuth integrates to 2 pi for the polar-axis coordinate.
        sum += z * z * r * r * std::sin(th) * (R / n) * (kPi / n) * 2 * kPi;
      }
  }
  return std::abs(lambda) * sum / L;
}

void suite_radius(std::vector<CheckResult>& out, Rng& rng) {
  double worst = 0.0;
  for (int dim : {2, 3}) {
    for (int k = 0; k < 25; ++k) {
      const double L = rng.uniform(0.1, 5.0), eps = rng.uniform(0.01, 0.5);
      std::vector<double> lambdas;
      for (int i = 0; i < dim; ++i) lambdas.push_back(rng.uniform(-10.0, 10.0));
      const auto radii = valid_radii(L, lambdas, eps, dim, 0.0, 1e300);
      for (int i = 0; i < dim; ++i)
        worst = std::max(worst, std::abs(axis_error_integral(dim, lambdas[i], L, radii[i]) / eps - 1.0));
    }
  }
  out.push_back({"radius", "per-axis error integral recovers epsilon", worst <= 0.05, fmt("max_rel_dev", worst)});

  const double r2 = valid_radii(1.0, std::vector<double>{1.0}, kPi / 4, 2, 0.0, 1e300)[0];
  const double r3 = valid_radii(1.0, std::vector<double>{1.0}, 4 * kPi / 15, 3, 0.0, 1e300)[0];
  out.push_back({"radius", "unit plug-in radii", std::abs(r2 - 1) <= 1e-12 && std::abs(r3 - 1) <= 1e-12,
                 fmt("R2", r2) + " " + fmt("R3", r3)});
}

void suite_index(std::vector<CheckResult>& out, Rng& rng) {
  const Bounds<3> b{{-1, -1, -1}, {1, 1, 1}};
  RadianceCache<3> cache(b, ScatterKind::single);
  for (int k = 0; k < 1000; ++k) {
    Moments<3> m;
    m.L = Rgb::gray(1.0);
    const double a = rng.uniform(0.5, 50.0), c = rng.uniform(0.5, 50.0), d = rng.uniform(0.5, 50.0);
    Mat3 h = Mat3::diagonal({a, c, d});
    const Vec3 axis = normalized(random_vec<3>(rng, -1, 1) + Vec3{1e-3, 0, 0});
    const Mat3 rot = Mat3::identity() + cross_matrix(axis) * 0.7;
    m.hess = {rot * h * transpose(rot), rot * h * transpose(rot), rot * h * transpose(rot)};
    for (auto& x : m.hess) x = symmetrized(x);
    RegionParams p;
    p.epsilon = rng.uniform(1e-4, 1e-2);
    p.mode = k % 2 ? RegionMode::anisotropic : RegionMode::isotropic;
    p.r_max = 0.5;
    cache.insert(make_record(random_vec<3>(rng, -1, 1), m, p));
  }
  long mismatches = 0, hits = 0;
  for (int q = 0; q < 1000; ++q) {
    const Vec3 x = random_vec<3>(rng, -1.1, 1.1);
    const auto a = cache.query(x), s = cache.linear_scan(x);
    hits += static_cast<long>(s.size());
    if (a != s) ++mismatches;
  }
  out.push_back({"index", "tree query equals linear scan", mismatches == 0,
                 fmt("mismatches", double(mismatches)) + " " + fmt("hits", double(hits))});
}

}  // namespace

const std::vector<std::string>& validation_suites() {
  static const std::vector<std::string> s{"transmittance", "formfactor", "subdivision", "radius", "index"};
  return s;
}

std::vector<CheckResult> run_validation(const std::string& suite, std::uint64_t seed) {
  std::vector<CheckResult> out;
  bool known = suite == "all";
  for (const auto& s : validation_suites()) known = known || s == suite;
  if (!known) throw Error("unknown validation suite '" + suite + "'");
  Rng rng(stream_seed(seed, 0x7a11));
  auto on = [&](const char* s) { return suite == "all" || suite == s; };
  if (on("transmittance")) suite_transmittance(out, rng);
  if (on("formfactor")) suite_formfactor(out, rng);
  if (on("subdivision")) suite_subdivision(out, rng);
  if (on("radius")) suite_radius(out, rng);
  if (on("index")) suite_index(out, rng);
  return out;
}

}  // namespace vrc
