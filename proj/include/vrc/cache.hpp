#pragma once

// Cache records with Hessian-driven valid regions, a loose 2^N-tree index,
// first-order interpolation, and the log-space baseline.

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "vrc/numerics.hpp"
#include "vrc/scene.hpp"
#include "vrc/subdivision.hpp"

namespace vrc {

enum class RegionMode { isotropic, anisotropic };

const char* to_string(RegionMode m);

struct RegionParams {
  double epsilon = 0.05;
  RegionMode mode = RegionMode::isotropic;
  double lambda_min = 0.0;  // |eigenvalues| below this count as zero
  double r_max = 1.0;
  double l_floor = 0.0;  // luminance floor for dark records
};

// lambda_min = 1e-12 / scale^2, r_max = 0.25 * diagonal, L_floor = 1e-6 * max emission.
template <int N>
RegionParams region_params(const Scene<N>& scene, double epsilon, RegionMode mode);

// Per-eigenvalue radii: (4 L eps / (pi |l|))^(1/4) in 2D, (15 L eps / (4 pi |l|))^(1/5)
// in 3D, clamped to r_max. Throws vrc::Error for L <= 0 or eps <= 0.
std::vector<double> valid_radii(double L, std::span<const double> eigenvalues, double epsilon, int dim,
                                double lambda_min, double r_max);

template <int N>
struct CacheRecord {
  Vec<N> position;
  Moments<N> moments;
  EigenSystem<N> eigen;  // of the luminance Hessian
  std::array<double, N> radii{};  // along eigen.vectors
  double epsilon = 0.0;
  ScatterKind kind = ScatterKind::single;
  RegionMode mode = RegionMode::isotropic;

  double max_radius() const;
  // sum_i ((p - x) . v_i / R_i)^2; the region is where this is <= 1.
  double normalized_distance_sq(const Vec<N>& p) const;
  bool contains(const Vec<N>& p) const { return normalized_distance_sq(p) <= 1.0; }
  // Zero radiance and zero curvature say nothing about how far the darkness
  // extends, so such records only answer for points no lit record covers.
  bool is_dark() const { return moments.L.is_black(); }
};

template <int N>
CacheRecord<N> make_record(const Vec<N>& x, const Moments<N>& m, const RegionParams& params);

// Baseline record: value and gradient with one isotropic radius.
template <int N>
CacheRecord<N> make_baseline_record(const Vec<N>& x, const Rgb& L, const std::array<Vec<N>, 3>& grad,
                                    double radius, ScatterKind kind, double epsilon);

// w = 3 d^2 - 2 d^3 with d = 1 - sqrt(normalized distance^2); 0 outside.
template <int N>
double weight_cubic(const Vec<N>& p, const CacheRecord<N>& record);

template <int N>
class RadianceCache {
 public:
  RadianceCache(const Bounds<N>& bounds, ScatterKind kind);
  ~RadianceCache();
  RadianceCache(RadianceCache&&) noexcept;
  RadianceCache& operator=(RadianceCache&&) noexcept;

  void insert(CacheRecord<N> record);
  // Indices of every record whose region contains p.
  std::vector<int> query(const Vec<N>& p) const;
  std::vector<int> linear_scan(const Vec<N>& p) const;

  const std::vector<CacheRecord<N>>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  ScatterKind kind() const { return kind_; }
  const Bounds<N>& bounds() const { return bounds_; }

 private:
  struct Node;
  Bounds<N> bounds_;
  ScatterKind kind_;
  std::vector<CacheRecord<N>> records_;
  std::unique_ptr<Node> root_;
};

enum class Coverage { none, dark, lit };

template <int N>
Coverage coverage(const RadianceCache<N>& cache, const Vec<N>& p);

// sum_k w_k max(0, L_k + grad L_k . d) / sum_k w_k over the lit records
// containing p, per channel; black when only dark records cover p, nullopt
// when none does.
template <int N>
std::optional<Rgb> interpolate(const RadianceCache<N>& cache, const Vec<N>& p);

// R = alpha * sum L_j / sum |grad L_j|, clamped to [r_min, r_max]; all-zero
// gradients give r_max.
double jarosz_radius(std::span<const double> L, std::span<const double> grad_norms, double alpha, double r_min,
                     double r_max);
double jarosz_radius(double sum_l, double sum_grad_norm, double alpha, double r_min, double r_max);

// exp of the weighted mean of ln L_k + (grad L_k / L_k) . d; records with a
// zero channel are left out of that channel.
template <int N>
std::optional<Rgb> jarosz_interpolate(const RadianceCache<N>& cache, const Vec<N>& p);

template <int N>
void write_cache_json(std::ostream& os, const RadianceCache<N>& cache);
// Returns the records; the caller rebuilds an index from them.
template <int N>
std::vector<CacheRecord<N>> read_cache_json(std::istream& is);

}  // namespace vrc
