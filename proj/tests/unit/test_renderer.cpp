#include <gtest/gtest.h>

#include <filesystem>

#include "vrc/image_io.hpp"
#include "vrc/renderer.hpp"
#include "vrc/scene_io.hpp"

using namespace vrc;

namespace {

SceneFile<2> load2(const char* name) {
  return std::get<SceneFile<2>>(load_scene(std::string(VRC_SCENE_DIR) + "/" + name + ".json"));
}

Image constant(int w, int h, double v) {
  Image img(w, h);
  for (auto& p : img.pixels) p = Rgb::gray(v);
  return img;
}

}  // namespace

TEST(Renderer, ModeNames) {
  for (auto m : {RenderMode::ours_iso, RenderMode::ours_aniso, RenderMode::baseline, RenderMode::path,
                 RenderMode::quadrature})
    EXPECT_EQ(parse_render_mode(to_string(m)), m);
  EXPECT_FALSE(parse_render_mode("nope").has_value());
}

TEST(Renderer, ErrorMapExamples) {
  const Image b = constant(4, 3, 2.0);
  const ErrorMap same = error_map(b, b);
  EXPECT_EQ(same.mean, 0.0);
  EXPECT_EQ(same.p95, 0.0);
  const ErrorMap off = error_map(constant(4, 3, 2.5), b);
  for (const auto& p : off.error.pixels) EXPECT_NEAR(p[0], 0.25, 1e-15);
  const ErrorMap zero = error_map(constant(4, 3, 1.0), constant(4, 3, 0.0));
  EXPECT_TRUE(std::isfinite(zero.mean));
  EXPECT_THROW(error_map(constant(4, 3, 1.0), constant(3, 4, 1.0)), Error);
}

TEST(Renderer, QuadratureRenderIsDeterministic) {
  const auto sf = load2("smooth");
  RenderSettings s;
  s.mode = RenderMode::quadrature;
  s.resolution = 6;
  s.quadrature_angular = 256;
  const FieldGrid grid = make_field_grid(sf.scene, s.resolution);
  const auto a = render<2>(sf.scene, grid, s, nullptr);
  const auto b = render<2>(sf.scene, grid, s, nullptr);
  EXPECT_EQ(a.total.pixels, b.total.pixels);
  EXPECT_GT(a.total.pixels[0].luminance(), 0.0);
}

TEST(Renderer, FrozenRenderDoesNotInsert) {
  const auto sf = load2("smooth");
  RenderSettings s;
  s.mode = RenderMode::ours_iso;
  s.resolution = 8;
  s.n_angular = 64;
  s.epsilon = 0.05;
  const FieldGrid grid = make_field_grid(sf.scene, s.resolution);
  CachePair<2> caches = make_cache_pair(sf.scene);
  const PopulateStats ps = populate_cache<2>(sf.scene, grid, s, caches);
  EXPECT_EQ(static_cast<long>(caches.single.size()), ps.records_single);
  const std::size_t before = caches.single.size() + caches.multiple.size();
  const auto out = render<2>(sf.scene, grid, s, &caches);
  EXPECT_EQ(caches.single.size() + caches.multiple.size(), before);
  EXPECT_EQ(out.stats.records_added, 0);
  EXPECT_EQ(out.stats.shading_points, 64);
}

TEST(Renderer, PointCountNonIncreasingInEpsilon) {
  const auto sf = load2("penumbra");
  RenderSettings s;
  s.mode = RenderMode::ours_iso;
  s.resolution = 16;
  s.n_angular = 64;
  const FieldGrid grid = make_field_grid(sf.scene, s.resolution);
  long prev = -1;
  for (double eps : {0.2, 0.05, 0.0125}) {
    s.epsilon = eps;
    CachePair<2> caches = make_cache_pair(sf.scene);
    const PopulateStats ps = populate_cache<2>(sf.scene, grid, s, caches);
    const long n = ps.records_single + ps.records_multiple;
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(Renderer, FiniteDifferencesRejectOffsetsOutsideBounds) {
  const auto sf = load2("smooth");
  EXPECT_THROW(fd_derivatives<2>(sf.scene, Vec2{0.9999, 0}, 1e-3, 10, 0), Error);
}

TEST(ImageIo, PfmRoundTrip) {
  Image img(3, 2);
  for (int k = 0; k < 6; ++k) img.pixels[k] = Rgb(k, 0.5 * k, -k);
  const auto path = std::filesystem::temp_directory_path() / "vrc_roundtrip.pfm";
  write_pfm(path.string(), img);
  const Image back = read_pfm(path.string());
  ASSERT_EQ(back.width, 3);
  ASSERT_EQ(back.height, 2);
  for (int k = 0; k < 6; ++k)
    for (int c = 0; c < 3; ++c) EXPECT_FLOAT_EQ(back.pixels[k][c], img.pixels[k][c]);
  std::filesystem::remove(path);
  EXPECT_THROW(write_pfm("/nonexistent/dir/x.pfm", img), IoError);
}
