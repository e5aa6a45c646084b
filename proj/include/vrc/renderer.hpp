#pragma once

// Cache population, field renders (2D) and ray-marched images (3D), plus the
// reference estimators used to judge them: path tracing, deterministic
// quadrature and finite differences.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vrc/cache.hpp"
#include "vrc/scene.hpp"
#include "vrc/subdivision.hpp"
#include "vrc/transport.hpp"

namespace vrc {

enum class RenderMode { ours_iso, ours_aniso, baseline, path, quadrature };

const char* to_string(RenderMode m);
// Accepts ours-iso, ours-aniso, baseline, path, quadrature.
std::optional<RenderMode> parse_render_mode(const std::string& s);
inline bool is_cache_mode(RenderMode m) { return m == RenderMode::ours_iso || m == RenderMode::ours_aniso || m == RenderMode::baseline; }

enum class ScatterSelect { both, single, multiple };

struct RenderSettings {
  int spp = 16;
  double march_step = 0.1;
  double epsilon = 0.05;           // relative error tolerance of our metric
  double baseline_epsilon = 0.25;  // alpha of the log-gradient metric; not comparable to epsilon
  double baseline_r_min = 1e-3;
  RenderMode mode = RenderMode::ours_iso;
  int n_angular = 0;  // 0: per-dimension default
  std::uint64_t seed = 0;
  bool frozen = true;  // render never inserts records
  int max_media_bounces = 2;
  ScatterSelect scatter = ScatterSelect::both;
  int resolution = 64;  // 2D field grid per axis; 3D overrides the camera width when > 0
  int quadrature_angular = 0;  // 0: 8192 (2D) or 4096 (3D)
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major, row 0 at the top (3D) or at min y (2D)

  Image() = default;
  Image(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h) {}
  Rgb& at(int i, int j) { return pixels[static_cast<std::size_t>(j) * width + i]; }
  const Rgb& at(int i, int j) const { return pixels[static_cast<std::size_t>(j) * width + i]; }
};

// Regular grid of cell centers over 2D scene bounds.
struct FieldGrid {
  Bounds<2> bounds;
  int nx = 0;
  int ny = 0;

  Vec2 cell_center(int i, int j) const;
  int cells() const { return nx * ny; }
};

FieldGrid make_field_grid(const Scene<2>& scene, int resolution);

template <int N>
struct CachePair {
  RadianceCache<N> single;
  RadianceCache<N> multiple;
};

template <int N>
CachePair<N> make_cache_pair(const Scene<N>& scene);

struct PopulateStats {
  long candidates = 0;
  long records_single = 0;
  long records_multiple = 0;
  long elements_evaluated = 0;
  long elements_dropped = 0;
  double seconds = 0.0;
  double seconds_per_record = 0.0;
};

// 2D views are field grids, 3D views are cameras.
template <int N>
struct ViewOf;
template <>
struct ViewOf<2> {
  using type = FieldGrid;
};
template <>
struct ViewOf<3> {
  using type = Camera;
};
template <int N>
using View = typename ViewOf<N>::type;

// Candidate points in the order population visits them: cell centers in a
// seeded random order (2D), or ray-marched points along random camera rays
// (3D).
template <int N>
std::vector<Vec<N>> population_candidates(const Scene<N>& scene, const View<N>& view,
                                          const RenderSettings& settings);

// Creates records for every candidate not covered by the caches.
template <int N>
PopulateStats populate_cache(const Scene<N>& scene, const View<N>& view, const RenderSettings& settings,
                             CachePair<N>& caches);

struct RenderStats {
  long shading_points = 0;
  long cache_misses = 0;
  long records_added = 0;
  double seconds = 0.0;
};

struct RenderOutput {
  Image total;
  Image single;
  Image multiple;
  RenderStats stats;
};

// 2D: S(x) at every cell center. 3D: ray-marched pinhole image with
// midpoint steps plus the transmitted surface term. Cache modes read `caches`
// (which may be null for path/quadrature modes).
template <int N>
RenderOutput render(const Scene<N>& scene, const View<N>& view, const RenderSettings& settings,
                    CachePair<N>* caches);

// Deterministic reference for S(x): dense unjittered directions for single
// scattering, nested direction quadrature and midpoint marching for the
// second bounce.
template <int N>
ScatterSplit quadrature_radiance(const Scene<N>& scene, const Vec<N>& x, const RenderSettings& settings);

// Central differences of path_trace_radiance with common random numbers.
// Throws vrc::Error when an offset leaves the scene bounds.
template <int N>
struct FdDerivatives {
  Moments<N> single;
  Moments<N> multiple;
};

template <int N>
FdDerivatives<N> fd_derivatives(const Scene<N>& scene, const Vec<N>& x, double h, long n_samples,
                                std::uint64_t seed, bool with_hessian = true, int max_media_bounces = 2);

struct GradientSample {
  Vec2 position;
  ScatterKind kind = ScatterKind::single;
  double value = 0.0;  // luminance
  Vec2 ours;
  Vec2 baseline;
  Vec2 reference;
};

// Luminance gradients of the three methods at the cell centers of `grid`.
std::vector<GradientSample> gradient_field(const Scene<2>& scene, const FieldGrid& grid,
                                           const RenderSettings& settings, long fd_samples, double fd_h);

struct ErrorMap {
  Image error;  // |a - b| / max(b, floor), luminance
  double mean = 0.0;
  double p95 = 0.0;
};

// floor = 1e-6 * max luminance of the reference. Throws on size mismatch.
ErrorMap error_map(const Image& result, const Image& reference);

template <int N>
int effective_n_angular(const RenderSettings& settings);

}  // namespace vrc
