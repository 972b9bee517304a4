#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "iflow/errors.hpp"
#include "iflow/io.hpp"
#include "iflow/pipeline.hpp"
#include "iflow/synth.hpp"

using namespace iflow;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int status;
  std::string output;
};

// Runs the command-line tool with stderr folded into the captured output.
CliRun cli(const std::string& args) {
  const std::string cmd = std::string(IFLOW_CLI) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("iflow_pipe_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(PipelineTest, SynthTrackEvalRoundTrip) {
  ASSERT_EQ(cli("synth --preset kitti13 --seed 3 -o " + p("ds")).status, 0);
  for (const char* f : {"scene.json", "gt/gt.txt", "masks/000001.png", "masks/000020.png",
                        "images/000020.png", "flow/000019.flo"})
    EXPECT_TRUE(fs::exists(dir_ / "ds" / f)) << f;
  EXPECT_FALSE(fs::exists(dir_ / "ds/flow/000020.flo"));

  const CliRun track = cli("track --masks " + p("ds/masks") + " --flow " + p("ds/flow") + " -o " + p("out.txt"));
  ASSERT_EQ(track.status, 0) << track.output;
  EXPECT_NE(track.output.find("frame"), std::string::npos);

  const CliRun perfect = cli("eval --gt " + p("ds/gt/gt.txt") + " --result " + p("ds/gt/gt.txt"));
  ASSERT_EQ(perfect.status, 0);
  EXPECT_NE(perfect.output.find("MOTAL"), std::string::npos);
  EXPECT_NE(perfect.output.find("100.0"), std::string::npos);
  EXPECT_LT(perfect.output.find("Rcll"), perfect.output.find("MOTA"));

  const CliRun kv = cli("eval --format kv --gt " + p("ds/gt/gt.txt") + " --result " + p("out.txt"));
  ASSERT_EQ(kv.status, 0) << kv.output;
  EXPECT_NE(kv.output.find("MOTA: "), std::string::npos);
}

TEST_F(PipelineTest, TrackIsByteDeterministic) {
  ASSERT_EQ(cli("synth --preset kitti13 -o " + p("ds")).status, 0);
  for (const char* out : {"a.txt", "b.txt"})
    ASSERT_EQ(cli("track -q --masks " + p("ds/masks") + " --zero-flow --md 0 -o " + p(out)).status, 0);
  EXPECT_FALSE(slurp(dir_ / "a.txt").empty());
  EXPECT_EQ(slurp(dir_ / "a.txt"), slurp(dir_ / "b.txt"));
}

TEST_F(PipelineTest, MissingFlowFileIsNamed) {
  ASSERT_EQ(cli("synth --preset kitti13 -o " + p("ds")).status, 0);
  fs::remove(dir_ / "ds/flow/000004.flo");
  const CliRun r = cli("track -q --masks " + p("ds/masks") + " --flow " + p("ds/flow") + " -o " + p("o.txt"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("000004.flo"), std::string::npos) << r.output;
}

TEST_F(PipelineTest, MotionSourceMustBeUnique) {
  ASSERT_EQ(cli("synth --preset kitti13 -o " + p("ds")).status, 0);
  EXPECT_NE(cli("track -q --masks " + p("ds/masks") + " -o " + p("o.txt")).status, 0);
  EXPECT_NE(cli("track -q --masks " + p("ds/masks") + " --zero-flow --flow " + p("ds/flow") + " -o " +
                p("o.txt"))
                .status,
            0);
}

TEST_F(PipelineTest, MalformedGroundTruthNamesLine) {
  std::ofstream gt(dir_ / "gt.txt");
  for (int i = 1; i <= 6; ++i) gt << i << ",1,1,1,4,4,1,-1,-1,-1\n";
  gt << "7,1,x,1,4,4,1,-1,-1,-1\n";
  gt.close();
  const CliRun r = cli("eval --gt " + p("gt.txt") + " --result " + p("gt.txt"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("line 7"), std::string::npos) << r.output;
}

TEST_F(PipelineTest, ConfigFileSuppliesFlags) {
  ASSERT_EQ(cli("synth --preset kitti13 -o " + p("ds")).status, 0);
  std::ofstream cfg(dir_ / "run.ini");
  cfg << "[track]\nmasks = \"" << p("ds/masks") << "\"\nzero-flow = true\nmd = 0\nquiet = true\noutput = \""
      << p("cfg.txt") << "\"\n";
  cfg.close();
  const CliRun r = cli("--config " + p("run.ini") + " track");
  ASSERT_EQ(r.status, 0) << r.output;
  ASSERT_EQ(cli("track -q --masks " + p("ds/masks") + " --zero-flow --md 0 -o " + p("flags.txt")).status, 0);
  EXPECT_EQ(slurp(dir_ / "cfg.txt"), slurp(dir_ / "flags.txt"));
}

TEST_F(PipelineTest, FlowRecoversSyntheticShift) {
  fs::create_directories(dir_ / "img");
  std::mt19937 rng(1);
  const GridDims d{48, 40};
  GrayImage a(d), b(d);
  for (Eigen::Index i = 0; i < a.intensity.size(); ++i) a.intensity.data()[i] = float(rng() % 256) / 255.0f;
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      const int sx = std::clamp(x - 3, 0, d.width - 1), sy = std::clamp(y + 2, 0, d.height - 1);
      b.intensity(y, x) = a.intensity(sy, sx);
    }
  write_gray_image(a, dir_ / "img/000001.png");
  write_gray_image(b, dir_ / "img/000002.png");
  const CliRun r = cli("flow --images " + p("img") + " -o " + p("flo") + " --block 7 --search 5");
  ASSERT_EQ(r.status, 0) << r.output;
  const FlowField f = read_flo(dir_ / "flo/000001.flo");
  int valid = 0;
  for (int y = 0; y < d.height; ++y)
    for (int x = 0; x < d.width; ++x) {
      if (!f.is_valid({x, y})) continue;
      ++valid;
      EXPECT_EQ(f.at({x, y}), Eigen::Vector2d(3, -2)) << x << "," << y;
    }
  EXPECT_GT(valid, 0);
}

TEST_F(PipelineTest, RenderColorsEachTrack) {
  SceneSpec spec;
  spec.dims = {40, 20};
  spec.frames = 3;
  SceneObject a, b;
  a.start = {2, 2};
  a.velocity = {1, 0};
  b.start = {25, 10};
  b.texture_seed = 2;
  spec.objects = {a, b};
  write_scene(generate(spec, 1), dir_ / "ds");
  ASSERT_EQ(cli("track -q --masks " + p("ds/masks") + " --flow " + p("ds/flow") + " -o " + p("r.txt")).status,
            0);
  const CliRun r = cli("render --masks " + p("ds/masks") + " --result " + p("r.txt") + " -o " + p("viz"));
  ASSERT_EQ(r.status, 0) << r.output;
  for (int t = 1; t <= 3; ++t) {
    const fs::path img = dir_ / "viz" / (frame_stem(t) + ".png");
    ASSERT_TRUE(fs::exists(img));
    const GrayImage g = read_gray_image(img);
    const float ca = g.intensity(3, 3 + t - 1), cb = g.intensity(12, 27);
    EXPECT_GT(ca, 0.0f);
    EXPECT_GT(cb, 0.0f);
  }
  EXPECT_NE(track_color(1), track_color(2));
}

TEST(ListFrames, RequiresConsecutiveNumbers) {
  const fs::path d = fs::temp_directory_path() / "iflow_list_frames";
  fs::remove_all(d);
  fs::create_directories(d);
  std::ofstream(d / "000001.png");
  std::ofstream(d / "000002.png");
  std::ofstream(d / "notes.txt");
  EXPECT_EQ(list_frames(d).size(), 2u);
  std::ofstream(d / "000004.png");
  EXPECT_THROW(list_frames(d), IoError);
  fs::remove_all(d);
}
