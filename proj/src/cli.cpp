#include "vrc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vrc/cache.hpp"
#include "vrc/image_io.hpp"
#include "vrc/renderer.hpp"
#include "vrc/scene_io.hpp"
#include "vrc/validation.hpp"

namespace vrc {

namespace {

using json = nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

struct Options {
  std::string scene;
  std::string mode = "ours-iso";
  std::string scatter = "both";
  double epsilon = 0.05;
  double baseline_epsilon = 0.25;
  int spp = 16;
  double march_step = 0.1;
  int n_angular = 0;
  std::uint64_t seed = 0;
  bool frozen = true;
  std::string out;
  int resolution = 0;
  std::string suite = "all";
  long fd_samples = 200000;
  double fd_h = 0.0;
  int points = 24;
  std::string cache;
  std::string levels = "256,1024,4096";
};

void prepare_output(const std::string& prefix) {
  const std::filesystem::path parent = std::filesystem::path(prefix).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError("cannot create output directory " + parent.string());
}

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

RenderSettings settings_from(const Options& o) {
  RenderSettings s;
  const auto mode = parse_render_mode(o.mode);
  if (!mode) throw UsageError("unknown --mode '" + o.mode + "'");
  s.mode = *mode;
  if (o.scatter == "both")
    s.scatter = ScatterSelect::both;
  else if (o.scatter == "single")
    s.scatter = ScatterSelect::single;
  else if (o.scatter == "multiple")
    s.scatter = ScatterSelect::multiple;
  else
    throw UsageError("unknown --scatter '" + o.scatter + "'");
  if (!(o.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  if (!(o.baseline_epsilon > 0.0)) throw UsageError("--baseline-epsilon must be positive");
  if (o.spp < 1) throw UsageError("--spp must be >= 1");
  if (!(o.march_step > 0.0)) throw UsageError("--march-step must be positive");
  if (o.n_angular < 0) throw UsageError("--n-angular must be >= 0");
  if (o.resolution < 0) throw UsageError("--resolution must be >= 0");
  s.epsilon = o.epsilon;
  s.baseline_epsilon = o.baseline_epsilon;
  s.spp = o.spp;
  s.march_step = o.march_step;
  s.n_angular = o.n_angular;
  if (s.mode == RenderMode::quadrature) s.quadrature_angular = o.n_angular;
  s.seed = o.seed;
  s.frozen = o.frozen;
  s.resolution = o.resolution;
  return s;
}

json settings_json(const RenderSettings& s, int dim) {
  return {{"mode", to_string(s.mode)},
          {"epsilon", s.epsilon},
          {"baseline_epsilon", s.baseline_epsilon},
          {"spp", s.spp},
          {"march_step", s.march_step},
          {"n_angular", dim == 2 ? effective_n_angular<2>(s) : effective_n_angular<3>(s)},
          {"seed", s.seed},
          {"frozen", s.frozen}};
}

template <int N>
View<N> view_for(const SceneFile<N>& sf, RenderSettings& s) {
  if constexpr (N == 2) {
    if (s.resolution == 0) s.resolution = 64;
    return make_field_grid(sf.scene, s.resolution);
  } else {
    if (!sf.camera) throw SceneFormatError("3D scene has no camera");
    return *sf.camera;
  }
}

// Record counts per log-spaced radius bin, relative to the scene diagonal.
template <int N>
json radius_histogram(const RadianceCache<N>& cache, double scale) {
  const int bins = 24;
  const double lo = -5.0, hi = std::log10(0.25) + 1e-9;
  std::vector<long> counts(bins, 0);
  for (const auto& r : cache.records()) {
    const double v = std::log10(std::max(r.max_radius() / scale, 1e-300));
    const int b = std::clamp(static_cast<int>((v - lo) / (hi - lo) * bins), 0, bins - 1);
    ++counts[b];
  }
  std::vector<double> edges;
  for (int b = 0; b <= bins; ++b) edges.push_back(std::pow(10.0, lo + (hi - lo) * b / bins));
  return {{"relative_radius_edges", edges}, {"counts", counts}};
}

json populate_json(const PopulateStats& st) {
  return {{"candidates", st.candidates},
          {"records_single", st.records_single},
          {"records_multiple", st.records_multiple},
          {"elements_evaluated", st.elements_evaluated},
          {"elements_dropped", st.elements_dropped}};
}

template <int N>
void write_caches(const std::string& prefix, const CachePair<N>& caches) {
  for (const auto* c : {&caches.single, &caches.multiple}) {
    const std::string path = prefix + "_" + to_string(c->kind()) + ".json";
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    write_cache_json(os, *c);
  }
}

template <int N>
int cmd_render(const SceneFile<N>& sf, const Options& o) {
  RenderSettings s = settings_from(o);
  const View<N> view = view_for(sf, s);
  const std::string prefix = o.out.empty() ? "render" : o.out;
  prepare_output(prefix);
  CachePair<N> caches = make_cache_pair(sf.scene);
  json stats{{"scene", sf.name}, {"dimensionality", N}, {"settings", settings_json(s, N)}};
  json timing;
  if (is_cache_mode(s.mode)) {
    const PopulateStats ps = populate_cache(sf.scene, view, s, caches);
    stats["populate"] = populate_json(ps);
    timing["populate_seconds"] = ps.seconds;
    timing["seconds_per_record"] = ps.seconds_per_record;
  }
  const RenderOutput out = render(sf.scene, view, s, is_cache_mode(s.mode) ? &caches : nullptr);
  stats["render"] = {{"shading_points", out.stats.shading_points},
                     {"cache_misses", out.stats.cache_misses},
                     {"records_added", out.stats.records_added}};
  timing["render_seconds"] = out.stats.seconds;
  write_pfm(prefix + ".pfm", out.total);
  write_ppm(prefix + ".ppm", out.total);
  if constexpr (N == 2) write_field_csv(prefix + ".csv", view, out);
  write_json(prefix + "_stats.json", stats);
  write_json(prefix + "_timing.json", timing);
  std::cout << "wrote " << prefix << ".pfm (" << out.total.width << "x" << out.total.height << ")\n";
  return kExitOk;
}

template <int N>
int cmd_populate(const SceneFile<N>& sf, const Options& o) {
  RenderSettings s = settings_from(o);
  if (!is_cache_mode(s.mode)) throw UsageError("populate needs a cache mode (ours-iso, ours-aniso, baseline)");
  const View<N> view = view_for(sf, s);
  const std::string prefix = o.out.empty() ? "cache" : o.out;
  prepare_output(prefix);
  CachePair<N> caches = make_cache_pair(sf.scene);
  const PopulateStats ps = populate_cache(sf.scene, view, s, caches);
  write_caches(prefix, caches);
  json stats{{"scene", sf.name},
             {"dimensionality", N},
             {"settings", settings_json(s, N)},
             {"populate", populate_json(ps)},
             {"points", ps.records_single + ps.records_multiple},
             {"histogram_single", radius_histogram(caches.single, sf.scene.scale())},
             {"histogram_multiple", radius_histogram(caches.multiple, sf.scene.scale())}};
  write_json(prefix + "_stats.json", stats);
  write_json(prefix + "_timing.json", {{"seconds", ps.seconds}, {"seconds_per_record", ps.seconds_per_record}});
  std::cout << "points " << ps.records_single + ps.records_multiple << " (single " << ps.records_single
            << ", multiple " << ps.records_multiple << ")\n";
  return kExitOk;
}

template <int N>
void dump_records(std::ostream& os, const std::vector<CacheRecord<N>>& recs, const char* kind) {
  for (const auto& r : recs) {
    os << kind;
    for (int i = 0; i < N; ++i) os << ',' << r.position[i];
    os << ',' << r.moments.L.luminance();
    for (int i = 0; i < N; ++i) os << ',' << r.radii[i];
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < N; ++k) os << ',' << r.eigen.vectors[i][k];
    os << '\n';
  }
}

template <int N>
void dump_header(std::ostream& os) {
  const char* axes = "xyz";
  os << "kind";
  for (int i = 0; i < N; ++i) os << ',' << axes[i];
  os << ",L";
  for (int i = 0; i < N; ++i) os << ",r" << i;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) os << ",v" << i << axes[k];
  os << '\n';
}

template <int N>
int cmd_dumpcache(const SceneFile<N>& sf, const Options& o) {
  RenderSettings s = settings_from(o);
  if (!is_cache_mode(s.mode)) throw UsageError("dumpcache needs a cache mode");
  const View<N> view = view_for(sf, s);
  const std::string path = o.out.empty() ? "cache.csv" : o.out;
  prepare_output(path);
  CachePair<N> caches = make_cache_pair(sf.scene);
  populate_cache(sf.scene, view, s, caches);
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os.precision(10);
  dump_header<N>(os);
  dump_records<N>(os, caches.single.records(), "single");
  dump_records<N>(os, caches.multiple.records(), "multiple");
  if (!os) throw IoError("write failed: " + path);
  std::cout << "wrote " << caches.single.size() + caches.multiple.size() << " records to " << path << '\n';
  return kExitOk;
}

template <int N>
int dumpcache_file(const Options& o, std::istream& is, const std::string& kind) {
  std::vector<CacheRecord<N>> recs;
  try {
    recs = read_cache_json<N>(is);
  } catch (const Error& e) {
    throw IoError(o.cache + ": " + e.what());
  }
  const std::string path = o.out.empty() ? "cache.csv" : o.out;
  prepare_output(path);
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os.precision(10);
  dump_header<N>(os);
  dump_records<N>(os, recs, kind.c_str());
  if (!os) throw IoError("write failed: " + path);
  std::cout << "wrote " << recs.size() << " records to " << path << '\n';
  return kExitOk;
}

int cmd_dumpcache_from_file(const Options& o) {
  std::ifstream is(o.cache);
  if (!is) throw IoError("cannot open cache file " + o.cache);
  json head;
  try {
    head = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(o.cache + ": " + e.what());
  }
  const int dim = head.value("dimensionality", 0);
  const std::string kind = head.value("kind", std::string("single"));
  std::istringstream again(head.dump());
  if (dim == 2) return dumpcache_file<2>(o, again, kind);
  if (dim == 3) return dumpcache_file<3>(o, again, kind);
  throw IoError(o.cache + ": bad dimensionality");
}

int cmd_gradfield(const SceneFile<2>& sf, const Options& o) {
  RenderSettings s = settings_from(o);
  if (s.resolution == 0) s.resolution = 8;
  const FieldGrid grid = make_field_grid(sf.scene, s.resolution);
  const double h = o.fd_h > 0.0 ? o.fd_h : 1e-3 * sf.scene.scale();
  if (o.fd_samples < 1) throw UsageError("--fd-samples must be >= 1");
  const std::string path = o.out.empty() ? "gradfield.csv" : o.out;
  prepare_output(path);
  const auto samples = gradient_field(sf.scene, grid, s, o.fd_samples, h);
  write_gradient_csv(path, samples);
  std::cout << "wrote " << samples.size() << " gradient samples to " << path << '\n';
  return kExitOk;
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("--levels expects comma-separated integers");
    }
    if (out.back() < 3) throw UsageError("--levels entries must be >= 3");
  }
  if (out.empty()) throw UsageError("--levels is empty");
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Median relative L2 error of single-scattering gradients against a
// finite-difference path-traced reference, per angular sample count.
int cmd_converge(const SceneFile<2>& sf, const Options& o) {
  RenderSettings s = settings_from(o);
  const std::vector<int> levels = parse_levels(o.levels);
  if (o.points < 1) throw UsageError("--points must be >= 1");
  const std::string path = o.out.empty() ? "converge.csv" : o.out;
  prepare_output(path);
  const double h = o.fd_h > 0.0 ? o.fd_h : 1e-3 * sf.scene.scale();
  const Bounds<2>& b = sf.scene.bounds();
  Rng rng(stream_seed(s.seed, 0xc0));
  std::vector<Vec2> pts;
  std::vector<Vec2> refs;
  for (int tries = 0; static_cast<int>(pts.size()) < o.points && tries < 100 * o.points; ++tries) {
    const double margin = 0.05 * sf.scene.scale();
    const Vec2 x{rng.uniform(b.lo[0] + margin, b.hi[0] - margin), rng.uniform(b.lo[1] + margin, b.hi[1] - margin)};
    const FdDerivatives<2> fd = fd_derivatives(sf.scene, x, h, o.fd_samples, s.seed, false, 1);
    const Vec2 g = fd.single.luminance_grad();
    if (!(norm(g) > 0.0)) continue;
    pts.push_back(x);
    refs.push_back(g);
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  os << "n_angular,median_rel_err_ours,median_rel_err_baseline,points\n";
  for (int n : levels) {
    std::vector<double> ours, base;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      SubdivisionSettings sub;
      sub.n_angular = n;
      sub.march_step = s.march_step;
      sub.seed = stream_seed(s.seed, k);
      sub.media_rings = false;
      const MomentEstimate<2> m = estimate_moments(sf.scene, pts[k], sub);
      const UnawareGradient<2> u = occlusion_unaware_gradient(sf.scene, pts[k], sub);
      Vec2 ub;
      for (int c = 0; c < 3; ++c) ub += u.single[c] * kLuminanceWeights[c];
      ours.push_back(norm(m.single.luminance_grad() - refs[k]) / norm(refs[k]));
      base.push_back(norm(ub - refs[k]) / norm(refs[k]));
    }
    os << n << ',' << median(ours) << ',' << median(base) << ',' << pts.size() << '\n';
    std::cout << "n_angular " << n << ": ours " << median(ours) << ", baseline " << median(base) << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
  return kExitOk;
}

int cmd_validate(const Options& o) {
  const auto results = run_validation(o.suite, o.seed);
  bool ok = true;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " (" << r.detail << ")\n";
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitValidation;
}

template <class F>
int with_scene(const Options& o, F&& f) {
  if (o.scene.empty()) throw UsageError("--scene is required");
  AnyScene any = load_scene(o.scene);
  return std::visit([&](const auto& sf) { return f(sf); }, any);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Second-order occlusion-aware volumetric radiance caching"};
  app.require_subcommand(1);
  Options o;

  auto add_scene_flags = [&o](CLI::App* sub) {
    sub->add_option("--scene", o.scene, "scene JSON file")->required();
    sub->add_option("--mode", o.mode, "ours-iso | ours-aniso | baseline | path | quadrature");
    sub->add_option("--scatter", o.scatter, "both | single | multiple");
    sub->add_option("--epsilon", o.epsilon, "relative error tolerance of the Hessian metric");
    sub->add_option("--baseline-epsilon", o.baseline_epsilon, "tolerance of the log-gradient baseline metric");
    sub->add_option("--spp", o.spp, "samples per pixel (3D) or per cell in path mode");
    sub->add_option("--march-step", o.march_step, "ray-marching step [scene units]");
    sub->add_option("--n-angular", o.n_angular, "directions per cache point, or per quadrature point in quadrature mode (0: default)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_flag("--frozen,!--no-frozen", o.frozen, "render without inserting records (default on)");
    sub->add_option("--resolution", o.resolution, "2D field cells per axis, or 3D image width");
    sub->add_option("--out", o.out, "output path or prefix");
  };

  CLI::App* render_cmd = app.add_subcommand("render", "populate (cache modes) and render an image or field");
  add_scene_flags(render_cmd);
  CLI::App* populate_cmd = app.add_subcommand("populate", "populate and serialize the caches");
  add_scene_flags(populate_cmd);
  CLI::App* gradfield_cmd = app.add_subcommand("gradfield", "2D gradient fields of ours, baseline and reference");
  add_scene_flags(gradfield_cmd);
  gradfield_cmd->add_option("--fd-samples", o.fd_samples, "path samples per finite-difference evaluation");
  gradfield_cmd->add_option("--fd-h", o.fd_h, "finite-difference offset (0: 1e-3 diagonal)");
  CLI::App* converge_cmd = app.add_subcommand("converge", "gradient error versus angular sample count (2D)");
  add_scene_flags(converge_cmd);
  converge_cmd->add_option("--fd-samples", o.fd_samples, "path samples per finite-difference evaluation");
  converge_cmd->add_option("--fd-h", o.fd_h, "finite-difference offset (0: 1e-3 diagonal)");
  converge_cmd->add_option("--points", o.points, "number of random evaluation points");
  converge_cmd->add_option("--levels", o.levels, "comma-separated angular sample counts");
  CLI::App* dump_cmd = app.add_subcommand("dumpcache", "cache record scatter data as CSV");
  dump_cmd->add_option("--scene", o.scene, "scene JSON file");
  dump_cmd->add_option("--cache", o.cache, "existing cache JSON (instead of populating)");
  dump_cmd->add_option("--mode", o.mode, "ours-iso | ours-aniso | baseline");
  dump_cmd->add_option("--scatter", o.scatter, "both | single | multiple");
  dump_cmd->add_option("--epsilon", o.epsilon, "relative error tolerance");
  dump_cmd->add_option("--baseline-epsilon", o.baseline_epsilon, "baseline tolerance");
  dump_cmd->add_option("--march-step", o.march_step, "ray-marching step");
  dump_cmd->add_option("--n-angular", o.n_angular, "stratified directions per cache point");
  dump_cmd->add_option("--seed", o.seed, "random seed");
  dump_cmd->add_option("--resolution", o.resolution, "2D field cells per axis, or 3D image width");
  dump_cmd->add_option("--out", o.out, "output CSV");
  CLI::App* validate_cmd = app.add_subcommand("validate", "run the built-in oracle suites");
  validate_cmd->add_option("--suite", o.suite, "all | transmittance | formfactor | subdivision | radius | index");
  validate_cmd->add_option("--seed", o.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(o);
    if (render_cmd->parsed())
      return with_scene(o, [&](const auto& sf) { return cmd_render(sf, o); });
    if (populate_cmd->parsed())
      return with_scene(o, [&](const auto& sf) { return cmd_populate(sf, o); });
    if (dump_cmd->parsed()) {
      if (!o.cache.empty()) return cmd_dumpcache_from_file(o);
      return with_scene(o, [&](const auto& sf) { return cmd_dumpcache(sf, o); });
    }
    if (gradfield_cmd->parsed() || converge_cmd->parsed()) {
      const bool grad = gradfield_cmd->parsed();
      return with_scene(o, [&](const auto& sf) -> int {
        using T = std::decay_t<decltype(sf)>;
        if constexpr (std::is_same_v<T, SceneFile<2>>) {
          return grad ? cmd_gradfield(sf, o) : cmd_converge(sf, o);
        } else {
          throw UsageError(std::string(grad ? "gradfield" : "converge") + " works on 2D scenes");
        }
      });
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SceneFormatError& e) {
    std::cerr << "scene error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace vrc
