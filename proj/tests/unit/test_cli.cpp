#include <gtest/gtest.h>

#include <sstream>

#include "advscene/keyvalue.hpp"
#include "cli.hpp"
#include "fixture.hpp"

namespace advscene::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "advscene");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, HelpExitsZero) {
  const auto r = invoke({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE((r.out + r.err).find("synthesize"), std::string::npos);
  EXPECT_EQ(invoke({"synthesize", "--help"}).code, kExitOk);
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto missing = invoke({"synthesize", "--output", "/tmp/x", "--preset", "mod_fog", "--seed", "1"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("--input"), std::string::npos) << missing.err;
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({"fuse", "--obj-depth", "1", "--obj-unc", "1", "--sce-depth", "1", "--sce-unc", "1", "--bogus"}).code,
            kExitUsage);
  EXPECT_EQ(invoke({"synthesize", "--input", "/tmp", "--output", "/tmp/x", "--preset", "snow", "--seed", "1"}).code,
            kExitUsage);
  EXPECT_EQ(invoke({"loss", "--pred-depth", "abc", "--pred-unc", "1", "--gt", "1"}).code, kExitUsage);
}

TEST(Cli, InvalidValuesAreUsageErrors) {
  EXPECT_EQ(invoke({"evaluate", "--gt", "/nonexistent/gt", "--pred", "/nonexistent/pred"}).code, kExitUsage);
  EXPECT_EQ(invoke({"loss", "--pred-depth", "1", "--pred-unc", "0", "--gt", "1"}).code, kExitUsage);
}

TEST(Cli, OperationalErrorsExitOne) {
  const auto root = testing::scratch_dir("cli_operational");
  fs::create_directories(root / "gt");
  fs::create_directories(root / "pred");
  kitti::write_text_file(root / "gt" / "000000.txt", "Car 0 0 0 1 2 3\n");
  kitti::write_text_file(root / "pred" / "000000.txt", "");
  const auto r = invoke({"evaluate", "--gt", (root / "gt").string(), "--pred", (root / "pred").string(), "--report", ""});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, FuseAndLossPrintResults) {
  const auto fused = invoke({"fuse", "--obj-depth", "2", "--obj-unc", "3", "--sce-depth", "5", "--sce-unc", "4"});
  EXPECT_EQ(fused.code, kExitOk);
  EXPECT_EQ(fused.out, "depth = 7\nuncertainty = 5\n");
  const auto loss = invoke({"loss", "--pred-depth", "11", "--pred-unc", "1.4142135623730951", "--gt", "10"});
  EXPECT_EQ(loss.code, kExitOk);
  EXPECT_NE(loss.out.find("loss = 1.3465"), std::string::npos) << loss.out;
  EXPECT_NE(loss.out.find("d_depth = 1\n"), std::string::npos) << loss.out;
}

TEST(Cli, KernelSelftestPasses) {
  const auto r = invoke({"kernels-selftest"});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST(Cli, EndToEndPipeline) {
  const auto root = testing::scratch_dir("cli_pipeline");
  const auto in = root / "kitti";
  testing::write_dataset(in, 3, 160, 64);

  auto r = invoke({"project-depth", "--input", in.string(), "--output", (in / "depth").string(), "--threads", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(kitti::list_frames(in / "depth", ".png").size(), 3u);

  r = invoke({"synthesize", "--input", in.string(), "--output", (root / "fog").string(), "--preset", "thick_fog",
              "--seed", "42", "--depth-source", "files", "--threads", "2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(kitti::list_frames(root / "fog" / "image_2", ".png").size(), 3u);

  const auto report_path = root / "report.txt";
  r = invoke({"evaluate", "--gt", (in / "label_2").string(), "--pred", (root / "fog" / "label_2").string(),
              "--report", report_path.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("100.00"), std::string::npos) << r.out;
  const auto kv = KeyValueFile::parse(kitti::read_text_file(report_path));
  EXPECT_EQ(kv.get_double("easy.ap3d_r40"), 100.0);
  EXPECT_EQ(kv.get_double("moderate.ap3d_r40"), 100.0);
  EXPECT_EQ(kv.get_double("hard.ap3d_r40"), 100.0);
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  const auto root = testing::scratch_dir("cli_threads");
  testing::write_dataset(root / "in", 4, 80, 32);
  for (const char* t : {"1", "4"}) {
    const auto r = invoke({"synthesize", "--input", (root / "in").string(), "--output", (root / t).string(), "--preset",
                           "dense_rain", "--seed", "5", "--threads", t});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  EXPECT_EQ(testing::snapshot_tree(root / "1"), testing::snapshot_tree(root / "4"));
}

TEST(Cli, DepthTargetsReportsBothModes) {
  const auto root = testing::scratch_dir("cli_targets");
  testing::write_dataset(root, 1, 160, 64);
  for (const char* mode : {"sparse", "dense"}) {
    const auto r = invoke({"depth-targets", "--input", root.string(), "--frame", "0", "--mode", mode});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("Car"), std::string::npos);
  }
  EXPECT_EQ(invoke({"depth-targets", "--input", root.string(), "--frame", "0", "--mode", "other"}).code, kExitUsage);
}

}  // namespace
}  // namespace advscene::cli
