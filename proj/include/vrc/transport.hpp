#pragma once

// Homogeneous transmittance with translational derivatives, isotropic phase
// functions, and unbiased path-traced estimates of in-scattered radiance.
//
// Throughout the library "radiance at a media point" is the in-scattered
// source term S(x) = sigma_s * integral of phase * L_i over the circle (2D) or
// sphere (3D). It is the quantity cached and rendered by ray marching.

#include <cstdint>
#include <numbers>

#include "vrc/numerics.hpp"
#include "vrc/rng.hpp"
#include "vrc/scene.hpp"

namespace vrc {

template <int N>
struct TransmittanceDerivs {
  double value = 1.0;
  Vec<N> grad;  // [1/length]
  Mat<N> hess;  // [1/length^2]
};

// T_r(x, y) = exp(-sigma_t |x - y|) and its gradient and Hessian with respect
// to translating x. Throws vrc::Error when x == y.
template <int N>
TransmittanceDerivs<N> transmittance_derivs(const Vec<N>& x, const Vec<N>& y, const Medium& medium);

inline double transmittance(double distance, const Medium& medium) {
  return std::exp(-medium.sigma_t() * distance);
}

// Measure of the full direction domain: 2 pi (circle) or 4 pi (sphere).
template <int N>
constexpr double direction_domain_measure() {
  return N == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi;
}

struct Phase {
  int dimensionality = 3;
};

// Isotropic phase function: 1/(2 pi) per radian in 2D, 1/(4 pi) per steradian in 3D.
double phase_eval(const Phase& phase);

template <int N>
Vec<N> uniform_direction(Rng& rng);

// Emission plus one bounce of direct Lambertian reflection of the emitters.
// The direct term is a deterministic midpoint quadrature over every emitter
// (`quadrature` sub-segments in 2D, quadrature^2 sub-triangles in 3D),
// attenuated by transmittance. Boundary hits return black.
template <int N>
Rgb surface_outgoing_radiance(const Scene<N>& scene, const Hit<N>& hit, int quadrature = 16);

struct ScatterSplit {
  Rgb single;    // surface light scattered once, at x
  Rgb multiple;  // light that scattered in the medium before reaching x

  Rgb total() const { return single + multiple; }
};

// One-sample estimate of S(x): uniform direction, transmittance-proportional
// free-flight distance, recursion for media vertices up to `max_bounces`
// scattering events (counting the one at x).
template <int N>
ScatterSplit inscatter_sample(const Scene<N>& scene, const Vec<N>& x, int max_bounces, Rng& rng);

// Mean of n_samples independent one-sample estimates. Sample i draws from
// stream_seed(seed, i), so estimates at nearby points share random numbers.
template <int N>
ScatterSplit path_trace_radiance(const Scene<N>& scene, const Vec<N>& x, long n_samples,
                                 int max_media_bounces = 2, std::uint64_t seed = 0);

}  // namespace vrc
