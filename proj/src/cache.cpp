#include "vrc/cache.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "json.hpp"

namespace vrc {

const char* to_string(RegionMode m) { return m == RegionMode::isotropic ? "isotropic" : "anisotropic"; }

template <int N>
RegionParams region_params(const Scene<N>& scene, double epsilon, RegionMode mode) {
  RegionParams p;
  p.epsilon = epsilon;
  p.mode = mode;
  p.lambda_min = 1e-12 / (scene.scale() * scene.scale());
  p.r_max = 0.25 * scene.scale();
  p.l_floor = 1e-6 * scene.max_emission();
  return p;
}

std::vector<double> valid_radii(double L, std::span<const double> eigenvalues, double epsilon, int dim,
                                double lambda_min, double r_max) {
  if (!(L > 0.0)) throw Error("valid_radii: L must be positive");
  if (!(epsilon > 0.0)) throw Error("valid_radii: epsilon must be positive");
  if (dim != 2 && dim != 3) throw Error("valid_radii: dimensionality must be 2 or 3");
  std::vector<double> out;
  for (double lambda : eigenvalues) {
    const double a = std::abs(lambda);
    double r = r_max;
    if (a > lambda_min) {
      r = dim == 2 ? std::pow(4.0 * L * epsilon / (std::numbers::pi * a), 0.25)
                   : std::pow(15.0 * L * epsilon / (4.0 * std::numbers::pi * a), 0.2);
    }
    out.push_back(std::min(r, r_max));
  }
  return out;
}

template <int N>
double CacheRecord<N>::max_radius() const {
  double r = 0.0;
  for (double v : radii) r = std::max(r, v);
  return r;
}

template <int N>
double CacheRecord<N>::normalized_distance_sq(const Vec<N>& p) const {
  const Vec<N> d = p - position;
  double s = 0.0;
  for (int i = 0; i < N; ++i) {
    const double t = dot(d, eigen.vectors[i]) / radii[i];
    s += t * t;
  }
  return s;
}

template <int N>
CacheRecord<N> make_record(const Vec<N>& x, const Moments<N>& m, const RegionParams& params) {
  CacheRecord<N> rec;
  rec.position = x;
  rec.moments = m;
  rec.kind = m.kind;
  rec.epsilon = params.epsilon;
  rec.mode = params.mode;
  rec.eigen = eigen_sym(symmetrized(m.luminance_hess()));
  const double L = std::max(m.luminance(), params.l_floor);
  if (!(L > 0.0)) {
    // Nothing emits: every region is as large as allowed.
    rec.radii.fill(params.r_max);
    return rec;
  }
  const auto r = valid_radii(L, rec.eigen.values, params.epsilon, N, params.lambda_min, params.r_max);
  for (int i = 0; i < N; ++i) rec.radii[i] = r[i];
  if (params.mode == RegionMode::isotropic) {
    // Largest |lambda| comes first and gives the smallest radius.
    rec.radii.fill(*std::min_element(r.begin(), r.end()));
  }
  return rec;
}

template <int N>
CacheRecord<N> make_baseline_record(const Vec<N>& x, const Rgb& L, const std::array<Vec<N>, 3>& grad,
                                    double radius, ScatterKind kind, double epsilon) {
  if (!(radius > 0.0)) throw Error("baseline record radius must be positive");
  CacheRecord<N> rec;
  rec.position = x;
  rec.moments.L = L;
  rec.moments.grad = grad;
  rec.moments.kind = kind;
  rec.kind = kind;
  rec.epsilon = epsilon;
  rec.mode = RegionMode::isotropic;
  for (int i = 0; i < N; ++i) {
    rec.eigen.vectors[i] = Vec<N>::axis(i);
    rec.radii[i] = radius;
  }
  return rec;
}

template <int N>
double weight_cubic(const Vec<N>& p, const CacheRecord<N>& record) {
  const double d = 1.0 - std::sqrt(record.normalized_distance_sq(p));
  if (d <= 0.0) return 0.0;
  return d * d * (3.0 - 2.0 * d);
}

// Loose tree: a record lives in the deepest node whose cell contains its
// center and whose half-size is at least its largest radius, so its region
// stays inside the node's cell grown by a factor two.
template <int N>
struct RadianceCache<N>::Node {
  Vec<N> center;
  double half = 0.0;
  std::vector<int> items;
  std::array<std::unique_ptr<Node>, (1 << N)> children;
};

namespace {
constexpr int kMaxDepth = 24;
}

template <int N>
RadianceCache<N>::RadianceCache(const Bounds<N>& bounds, ScatterKind kind)
    : bounds_(bounds), kind_(kind), root_(std::make_unique<Node>()) {
  root_->center = bounds.center();
  for (int i = 0; i < N; ++i) root_->half = std::max(root_->half, 0.5 * (bounds.hi[i] - bounds.lo[i]));
}

template <int N>
RadianceCache<N>::~RadianceCache() = default;
template <int N>
RadianceCache<N>::RadianceCache(RadianceCache&&) noexcept = default;
template <int N>
RadianceCache<N>& RadianceCache<N>::operator=(RadianceCache&&) noexcept = default;

template <int N>
void RadianceCache<N>::insert(CacheRecord<N> record) {
  const int id = static_cast<int>(records_.size());
  const double r = record.max_radius();
  const Vec<N> p = record.position;
  records_.push_back(std::move(record));

  Node* node = root_.get();
  bool inside = true;
  for (int i = 0; i < N; ++i) inside = inside && std::abs(p[i] - node->center[i]) <= node->half;
  for (int depth = 0; inside && depth < kMaxDepth && 0.5 * node->half >= r; ++depth) {
    int child = 0;
    for (int i = 0; i < N; ++i)
      if (p[i] >= node->center[i]) child |= 1 << i;
    auto& slot = node->children[child];
    if (!slot) {
      slot = std::make_unique<Node>();
      slot->half = 0.5 * node->half;
      for (int i = 0; i < N; ++i)
        slot->center[i] = node->center[i] + ((child >> i) & 1 ? slot->half : -slot->half);
    }
    node = slot.get();
  }
  node->items.push_back(id);
}

template <int N>
std::vector<int> RadianceCache<N>::query(const Vec<N>& p) const {
  std::vector<int> out;
  std::vector<const Node*> stack{root_.get()};
  while (!stack.empty()) {
    const Node* node = stack.back();
    stack.pop_back();
    for (int id : node->items)
      if (records_[id].contains(p)) out.push_back(id);
    for (const auto& c : node->children) {
      if (!c) continue;
      bool near = true;
      for (int i = 0; i < N && near; ++i) near = std::abs(p[i] - c->center[i]) <= 2.0 * c->half * (1.0 + 1e-12);
      if (near) stack.push_back(c.get());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <int N>
std::vector<int> RadianceCache<N>::linear_scan(const Vec<N>& p) const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(records_.size()); ++i)
    if (records_[i].contains(p)) out.push_back(i);
  return out;
}

template <int N>
Coverage coverage(const RadianceCache<N>& cache, const Vec<N>& p) {
  Coverage out = Coverage::none;
  for (int id : cache.query(p)) {
    const CacheRecord<N>& rec = cache.records()[id];
    if (weight_cubic(p, rec) <= 0.0) continue;
    if (!rec.is_dark()) return Coverage::lit;
    out = Coverage::dark;
  }
  return out;
}

template <int N>
std::optional<Rgb> interpolate(const RadianceCache<N>& cache, const Vec<N>& p) {
  Rgb sum;
  double wsum = 0.0;
  bool dark = false;
  for (int id : cache.query(p)) {
    const CacheRecord<N>& rec = cache.records()[id];
    const double w = weight_cubic(p, rec);
    if (w <= 0.0) continue;
    if (rec.is_dark()) {
      dark = true;
      continue;
    }
    const Vec<N> d = p - rec.position;
    for (int c = 0; c < 3; ++c) sum[c] += w * std::max(0.0, rec.moments.L[c] + dot(rec.moments.grad[c], d));
    wsum += w;
  }
  if (wsum > 0.0) return sum * (1.0 / wsum);
  if (dark) return Rgb{};
  return std::nullopt;
}

double jarosz_radius(double sum_l, double sum_grad_norm, double alpha, double r_min, double r_max) {
  if (!(sum_grad_norm > 0.0)) return r_max;
  return std::clamp(alpha * sum_l / sum_grad_norm, r_min, r_max);
}

double jarosz_radius(std::span<const double> L, std::span<const double> grad_norms, double alpha, double r_min,
                     double r_max) {
  if (L.empty() || L.size() != grad_norms.size()) throw Error("jarosz_radius: need matching non-empty samples");
  double sl = 0.0, sg = 0.0;
  for (std::size_t i = 0; i < L.size(); ++i) {
    sl += L[i];
    sg += grad_norms[i];
  }
  return jarosz_radius(sl, sg, alpha, r_min, r_max);
}

template <int N>
std::optional<Rgb> jarosz_interpolate(const RadianceCache<N>& cache, const Vec<N>& p) {
  std::array<double, 3> logsum{}, wsum{};
  bool covered = false;
  for (int id : cache.query(p)) {
    const CacheRecord<N>& rec = cache.records()[id];
    const double w = weight_cubic(p, rec);
    if (w <= 0.0) continue;
    covered = true;
    const Vec<N> d = p - rec.position;
    for (int c = 0; c < 3; ++c) {
      const double l = rec.moments.L[c];
      if (!(l > 0.0)) continue;
      logsum[c] += w * (std::log(l) + dot(rec.moments.grad[c], d) / l);
      wsum[c] += w;
    }
  }
  if (!covered) return std::nullopt;
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = wsum[c] > 0.0 ? std::exp(logsum[c] / wsum[c]) : 0.0;
  return out;
}

namespace {

using json = nlohmann::json;

template <int N>
json to_json(const Vec<N>& v) {
  return json(std::vector<double>(v.c.begin(), v.c.end()));
}

template <int N>
Vec<N> vec_from(const json& j) {
  if (!j.is_array() || j.size() != N) throw Error("cache file: bad vector");
  Vec<N> v;
  for (int i = 0; i < N; ++i) v[i] = j[i].get<double>();
  return v;
}

template <int N>
json to_json(const Mat<N>& m) {
  json rows = json::array();
  for (int i = 0; i < N; ++i) rows.push_back(std::vector<double>(m.m[i].begin(), m.m[i].end()));
  return rows;
}

template <int N>
Mat<N> mat_from(const json& j) {
  if (!j.is_array() || j.size() != N) throw Error("cache file: bad matrix");
  Mat<N> m;
  for (int i = 0; i < N; ++i) {
    const Vec<N> r = vec_from<N>(j[i]);
    for (int k = 0; k < N; ++k) m(i, k) = r[k];
  }
  return m;
}

}  // namespace

template <int N>
void write_cache_json(std::ostream& os, const RadianceCache<N>& cache) {
  json root;
  root["format"] = "vrc-cache";
  root["version"] = 1;
  root["dimensionality"] = N;
  root["kind"] = to_string(cache.kind());
  json recs = json::array();
  for (const auto& r : cache.records()) {
    json j;
    j["position"] = to_json(r.position);
    j["L"] = {r.moments.L[0], r.moments.L[1], r.moments.L[2]};
    json g = json::array(), h = json::array(), vecs = json::array();
    for (int c = 0; c < 3; ++c) {
      g.push_back(to_json(r.moments.grad[c]));
      h.push_back(to_json(r.moments.hess[c]));
    }
    for (int i = 0; i < N; ++i) vecs.push_back(to_json(r.eigen.vectors[i]));
    j["grad"] = g;
    j["hess"] = h;
    j["eigenvalues"] = std::vector<double>(r.eigen.values.begin(), r.eigen.values.end());
    j["eigenvectors"] = vecs;
    j["radii"] = std::vector<double>(r.radii.begin(), r.radii.end());
    j["epsilon"] = r.epsilon;
    j["mode"] = to_string(r.mode);
    recs.push_back(j);
  }
  root["records"] = recs;
  os << root.dump(1) << '\n';
}

template <int N>
std::vector<CacheRecord<N>> read_cache_json(std::istream& is) {
  std::vector<CacheRecord<N>> out;
  try {
    const json root = json::parse(is);
    if (root.at("format") != "vrc-cache" || root.at("version") != 1) throw Error("cache file: unknown format");
    if (root.at("dimensionality") != N) throw Error("cache file: dimensionality mismatch");
    const ScatterKind kind = root.at("kind") == "single" ? ScatterKind::single : ScatterKind::multiple;
    for (const auto& j : root.at("records")) {
      CacheRecord<N> r;
      r.position = vec_from<N>(j.at("position"));
      for (int c = 0; c < 3; ++c) {
        r.moments.L[c] = j.at("L")[c].get<double>();
        r.moments.grad[c] = vec_from<N>(j.at("grad")[c]);
        r.moments.hess[c] = mat_from<N>(j.at("hess")[c]);
      }
      for (int i = 0; i < N; ++i) {
        r.eigen.values[i] = j.at("eigenvalues")[i].get<double>();
        r.eigen.vectors[i] = vec_from<N>(j.at("eigenvectors")[i]);
        r.radii[i] = j.at("radii")[i].get<double>();
      }
      r.epsilon = j.at("epsilon").get<double>();
      r.mode = j.at("mode") == "isotropic" ? RegionMode::isotropic : RegionMode::anisotropic;
      r.kind = kind;
      r.moments.kind = kind;
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("cache file: ") + e.what());
  }
  return out;
}

template RegionParams region_params(const Scene<2>&, double, RegionMode);
template RegionParams region_params(const Scene<3>&, double, RegionMode);
template struct CacheRecord<2>;
template struct CacheRecord<3>;
template CacheRecord<2> make_record(const Vec2&, const Moments<2>&, const RegionParams&);
template CacheRecord<3> make_record(const Vec3&, const Moments<3>&, const RegionParams&);
template CacheRecord<2> make_baseline_record(const Vec2&, const Rgb&, const std::array<Vec2, 3>&, double,
                                             ScatterKind, double);
template CacheRecord<3> make_baseline_record(const Vec3&, const Rgb&, const std::array<Vec3, 3>&, double,
                                             ScatterKind, double);
template double weight_cubic(const Vec2&, const CacheRecord<2>&);
template double weight_cubic(const Vec3&, const CacheRecord<3>&);
template class RadianceCache<2>;
template class RadianceCache<3>;
template Coverage coverage(const RadianceCache<2>&, const Vec2&);
template Coverage coverage(const RadianceCache<3>&, const Vec3&);
template std::optional<Rgb> interpolate(const RadianceCache<2>&, const Vec2&);
template std::optional<Rgb> interpolate(const RadianceCache<3>&, const Vec3&);
template std::optional<Rgb> jarosz_interpolate(const RadianceCache<2>&, const Vec2&);
template std::optional<Rgb> jarosz_interpolate(const RadianceCache<3>&, const Vec3&);
template void write_cache_json(std::ostream&, const RadianceCache<2>&);
template void write_cache_json(std::ostream&, const RadianceCache<3>&);
template std::vector<CacheRecord<2>> read_cache_json(std::istream&);
template std::vector<CacheRecord<3>> read_cache_json(std::istream&);

}  // namespace vrc
