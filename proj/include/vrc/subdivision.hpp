#pragma once

// Occlusion-free piecewise-linear proxy of the scene around a media point:
// one surface ring at the nearest hits plus concentric media rings whose
// blocked strata carry zero-radiance star samples. Radiance, gradient and
// Hessian of the in-scattered source term follow from the form factors of
// the ring elements.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vrc/formfactor.hpp"
#include "vrc/numerics.hpp"
#include "vrc/scene.hpp"
#include "vrc/transport.hpp"

namespace vrc {

enum class ScatterKind { single, multiple };

const char* to_string(ScatterKind k);

template <int N>
struct Moments {
  Rgb L;
  std::array<Vec<N>, 3> grad{};  // per channel
  std::array<Mat<N>, 3> hess{};  // per channel, symmetric
  ScatterKind kind = ScatterKind::single;

  double luminance() const { return L.luminance(); }
  Vec<N> luminance_grad() const;
  Mat<N> luminance_hess() const;
  Moments& operator+=(const Moments& o);
};

template <int N>
struct RingElement {
  std::array<Vec<N>, N> vertices{};
  std::array<bool, N> is_star{};
  Rgb representative_radiance;         // L(y_l) at the furthest vertex
  double representative_distance = 0;  // |x - y_l|
  Vec<N> representative_point;
};

enum class RingKind { surface, media };

template <int N>
struct Ring {
  RingKind kind = RingKind::media;
  double distance = 0.0;  // r_i; 0 for the surface ring
  double weight = 1.0;    // 1/pdf(r_i): march_step for media rings, 1 for the surface ring
  // One vertex per direction.
  std::vector<Vec<N>> points;
  std::vector<Rgb> radiance;
  std::vector<char> is_star;
};

struct SubdivisionSettings {
  int n_angular = 256;
  double march_step = 0.1;
  std::uint64_t seed = 0;
  // Scattering events per path counted at x; media vertices get max_media_bounces - 1.
  int max_media_bounces = 2;
  int media_samples = 1;  // path samples per media vertex
  bool media_rings = true;
  bool jitter = true;
};

// Defaults follow the angular budgets used in practice: 256 (2D), 16384 (3D).
template <int N>
SubdivisionSettings default_subdivision_settings();

template <int N>
struct Subdivision {
  Vec<N> center;
  DirectionSet<N> directions;
  std::vector<double> surface_distance;  // s per direction
  std::vector<Ring<N>> rings;            // media rings by increasing r, then the surface ring

  const Ring<N>& surface_ring() const { return rings.back(); }
  RingElement<N> element(const Ring<N>& ring, int e) const;
};

template <int N>
Subdivision<N> build_subdivision(const Scene<N>& scene, const Vec<N>& x, const SubdivisionSettings& settings);

// sigma_s * T(x, y_l) * L(y_l) * F(x). Degenerate elements return 0.
template <int N>
Rgb element_radiance(const RingElement<N>& elem, const Vec<N>& x, const Medium& medium);

struct ElementStats {
  long evaluated = 0;
  long dropped = 0;  // degenerate form factor configurations

  double dropped_fraction() const { return evaluated > 0 ? double(dropped) / double(evaluated) : 0.0; }
};

template <int N>
struct MomentEstimate {
  Moments<N> single;    // surface ring
  Moments<N> multiple;  // media rings
  // Stratified direct estimates of the same two quantities, free of the
  // piecewise-constant element approximation.
  Rgb direct_single;
  Rgb direct_multiple;
  ElementStats stats;
};

template <int N>
MomentEstimate<N> estimate_moments(const Scene<N>& scene, const Subdivision<N>& sub);

template <int N>
MomentEstimate<N> estimate_moments(const Scene<N>& scene, const Vec<N>& x, const SubdivisionSettings& settings);

// Gradients with visibility held fixed: single scattering keeps the surface
// hits in place, multiple scattering translates whole paths rigidly.
template <int N>
struct UnawareGradient {
  std::array<Vec<N>, 3> single{};
  std::array<Vec<N>, 3> multiple{};
  Rgb single_value;
  Rgb multiple_value;
  // Sums of per-sample luminance and luminance-gradient norms, for the
  // log-space radius metric.
  double single_sum_l = 0.0, single_sum_grad = 0.0;
  double multiple_sum_l = 0.0, multiple_sum_grad = 0.0;
};

template <int N>
UnawareGradient<N> occlusion_unaware_gradient(const Scene<N>& scene, const Vec<N>& x,
                                              const SubdivisionSettings& settings);

// One line per ring vertex and per element.
template <int N>
void write_subdivision_text(std::ostream& os, const Scene<N>& scene, const Subdivision<N>& sub);

}  // namespace vrc
