#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "vrc/cli.hpp"

using namespace vrc;

namespace {

std::string scene(const char* name) { return std::string(VRC_SCENE_DIR) + "/" + name + ".json"; }

std::filesystem::path tmpdir() {
  auto p = std::filesystem::temp_directory_path() / "vrc_cli_test";
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({"vrc"}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "frobnicate"}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", scene("smooth"), "--bogus"}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", scene("smooth"), "--mode", "wrong"}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", scene("smooth"), "--epsilon", "-1"}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "gradfield", "--scene", scene("box3d")}), kExitUsage);
  EXPECT_EQ(run_cli({"vrc", "validate", "--suite", "nope"}), kExitUsage);
}

TEST(Cli, IoErrors) {
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", "/nonexistent.json"}), kExitIo);
  const auto bad = tmpdir() / "bad.json";
  std::ofstream(bad) << "{\"dimensionality\": 2";
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", bad.string()}), kExitIo);
  EXPECT_EQ(run_cli({"vrc", "render", "--scene", scene("smooth"), "--mode", "quadrature", "--resolution", "2",
                     "--out", "/proc/forbidden/x"}),
            kExitIo);
  EXPECT_EQ(run_cli({"vrc", "dumpcache", "--cache", "/nonexistent_cache.json"}), kExitIo);
}

TEST(Cli, ValidateFormFactorSuitePasses) { EXPECT_EQ(run_cli({"vrc", "validate", "--suite", "formfactor"}), kExitOk); }

TEST(Cli, PopulateAndDumpCache) {
  const auto prefix = (tmpdir() / "pop").string();
  ASSERT_EQ(run_cli({"vrc", "populate", "--scene", scene("smooth"), "--mode", "ours-aniso", "--resolution", "6",
                     "--n-angular", "64", "--out", prefix}),
            kExitOk);
  EXPECT_TRUE(std::filesystem::exists(prefix + "_single.json"));
  EXPECT_TRUE(std::filesystem::exists(prefix + "_stats.json"));
  const auto csv = (tmpdir() / "dump.csv").string();
  ASSERT_EQ(run_cli({"vrc", "dumpcache", "--cache", prefix + "_single.json", "--out", csv}), kExitOk);
  std::ifstream is(csv);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header.rfind("kind,x,y,L,r0,r1", 0), 0u);
}
