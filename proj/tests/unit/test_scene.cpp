#include <gtest/gtest.h>

#include <numbers>

#include "vrc/scene_io.hpp"
#include "vrc/transport.hpp"

using namespace vrc;

namespace {

const char* kScene2 = R"({
  "dimensionality": 2, "name": "t",
  "medium": {"sigma_s": 0.5, "sigma_a": 0.1},
  "bounds": {"min": [-1, -1], "max": [1, 1]},
  "surfaces": [
    {"vertices": [[-0.5, 0.5], [0.5, 0.5]], "emission": 2},
    {"vertices": [[-0.5, 0.0], [0.5, 0.0]], "albedo": [0.5, 0.4, 0.3]}
  ]})";

}  // namespace

TEST(SceneIo, ParsesTwoDimensionalScene) {
  const AnyScene any = parse_scene(kScene2);
  ASSERT_TRUE(std::holds_alternative<SceneFile<2>>(any));
  const auto& sf = std::get<SceneFile<2>>(any);
  EXPECT_EQ(sf.name, "t");
  EXPECT_EQ(sf.scene.surfaces().size(), 2u);
  EXPECT_EQ(sf.scene.emitters().size(), 1u);
  EXPECT_DOUBLE_EQ(sf.scene.medium().sigma_t(), 0.6);
  EXPECT_DOUBLE_EQ(sf.scene.surfaces()[1].albedo[2], 0.3);
  EXPECT_NEAR(sf.scene.scale(), std::sqrt(8.0), 1e-15);
}

TEST(SceneIo, RejectsMalformedInput) {
  EXPECT_THROW(parse_scene("{"), SceneFormatError);
  EXPECT_THROW(parse_scene(R"({"dimensionality": 4})"), SceneFormatError);
  std::string extra = kScene2;
  extra.insert(1, "\"colour\": 1,");
  EXPECT_THROW(parse_scene(extra), SceneFormatError);
  std::string cam = kScene2;
  cam.insert(1, "\"camera\": {\"position\": [0,0,1], \"look_at\": [0,0,0]},");
  EXPECT_THROW(parse_scene(cam), SceneFormatError);
  EXPECT_THROW(load_scene("/nonexistent/scene.json"), IoError);
}

TEST(SceneIo, ShippedScenesLoad) {
  for (const char* name : {"penumbra", "cross_shadows", "strips", "square_emitter", "smooth", "box3d"}) {
    EXPECT_NO_THROW(load_scene(std::string(VRC_SCENE_DIR) + "/" + name + ".json")) << name;
  }
  const auto box = load_scene(std::string(VRC_SCENE_DIR) + "/box3d.json");
  ASSERT_TRUE(std::holds_alternative<SceneFile<3>>(box));
  EXPECT_TRUE(std::get<SceneFile<3>>(box).camera.has_value());
}

TEST(Scene, IntersectAndVisibility) {
  const auto sf = std::get<SceneFile<2>>(parse_scene(kScene2));
  const auto hit = intersect(sf.scene, Ray<2>{{0, -0.5}, {0, 1}});
  ASSERT_TRUE(hit.has_value());
  EXPECT_NEAR(hit->t, 0.5, 1e-12);
  EXPECT_EQ(hit->surface, 1);
  EXPECT_NEAR(hit->normal[1], -1.0, 1e-12);
  EXPECT_FALSE(visible(sf.scene, Vec2{0, -0.5}, Vec2{0, 0.5}));
  EXPECT_TRUE(visible(sf.scene, Vec2{0.8, -0.5}, Vec2{0.8, 0.5}));
  const Hit<2> out = trace_to_boundary(sf.scene, {0.9, 0.9}, {1, 0});
  EXPECT_TRUE(out.on_boundary());
  EXPECT_NEAR(out.t, 0.1, 1e-12);
}

TEST(Scene, SurfaceGeometry) {
  Surface<3> tri;
  tri.vertices = {Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}};
  EXPECT_NEAR(tri.measure(), 0.5, 1e-15);
  EXPECT_NEAR(tri.normal()[2], 1.0, 1e-15);
  EXPECT_NEAR(tri.centroid()[0], 1.0 / 3.0, 1e-15);
}

TEST(Scene, StratifiedDirectionsCoverTheDomain) {
  const auto d2 = stratified_directions<2>(100, 1);
  double m2 = 0;
  for (double m : d2.stratum_measure) m2 += m;
  EXPECT_NEAR(m2, 2 * std::numbers::pi, 1e-12);
  EXPECT_EQ(d2.elements.size(), 100u);
  const auto d3 = stratified_directions<3>(1024, 1);
  double m3 = 0;
  for (double m : d3.stratum_measure) m3 += m;
  EXPECT_NEAR(m3, 4 * std::numbers::pi, 1e-10);
  for (const auto& d : d3.directions) EXPECT_NEAR(norm(d), 1.0, 1e-12);
  EXPECT_EQ(static_cast<int>(d3.directions.size()), valid_direction_count_3d(1024));
}

TEST(Scene, RejectsInvalidMedium) {
  EXPECT_THROW(Scene<2>({}, Medium{-1, 0}, Bounds<2>{{-1, -1}, {1, 1}}), Error);
  EXPECT_THROW(Scene<2>({}, Medium{1, 0}, Bounds<2>{{1, -1}, {-1, 1}}), Error);
}
