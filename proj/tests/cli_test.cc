#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "csslab/cssf.h"
#include "csslab/checkpoint.h"
#include "csslab/feature_grid.h"
#include "csslab/report.h"

namespace csslab {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with stdout+stderr captured to a file.
Result cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "csslab_cli_test.log";
  const std::string cmd =
      std::string(CSSLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "csslab_cli_test";
  fs::create_directories(dir);
  return dir;
}

TEST(CliGenTest, DeterministicFilesAndHistogram) {
  const fs::path a = workdir() / "a.cssf", b = workdir() / "b.cssf";
  const std::string common = "gen --classes 10 --seed 7 --size 12 --images 2";
  Result ra = cli(common + " --out " + a.string());
  ASSERT_EQ(ra.code, 0) << ra.out;
  ASSERT_EQ(cli(common + " --out " + b.string()).code, 0);
  EXPECT_EQ(read_file_bytes(a), read_file_bytes(b));
  EXPECT_TRUE(fs::exists(workdir() / "a.eval.cssf"));

  // Printed histogram equals a recount of the reloaded file.
  const Dataset d = load_cssf(a);
  std::vector<std::uint64_t> counts(d.num_classes + 1, 0);
  for (const auto& g : d.images) {
    for (ClassId l : g.labels) ++counts[l];
  }
  std::istringstream lines(ra.out);
  std::string line;
  std::getline(lines, line);  // summary
  std::getline(lines, line);  // column header
  for (std::size_t c = 0; c < counts.size(); ++c) {
    ASSERT_TRUE(std::getline(lines, line));
    std::istringstream fields(line);
    std::size_t id = 0;
    std::uint64_t n = 0;
    fields >> id >> n;
    EXPECT_EQ(id, c);
    EXPECT_EQ(n, counts[c]);
  }
}

TEST(CliGenTest, ZeroClassesIsUsageError) {
  const Result r = cli("gen --classes 0 --out " + (workdir() / "z.cssf").string());
  EXPECT_EQ(r.code, 2) << r.out;
}

TEST(CliGenTest, UnwritablePathFails) {
  const Result r = cli("gen --classes 2 --size 8 --out /proc/nope/x.cssf");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.out.find("error"), std::string::npos) << r.out;
}

void write_config(const fs::path& path, const std::string& strategy,
                  const fs::path& out, const std::string& setting = "2-1") {
  std::ofstream f(path);
  f << "[experiment]\nname = " << strategy << "\nseed = 3\nsetting = "
    << setting << "\n"
    << "strategy = " << strategy << "\noutput_dir = " << out.string() << "\n"
    << "probing = true\nmd = true\n"
    << "[model]\nhidden_dim = 8\nembed_dim = 5\n"
    << "[optim]\nepochs_per_step = 2\n"
    << "[data]\nclasses = 4\nfeat_dim = 5\nheight = 8\nwidth = 8\n"
    << "images_per_class = 2\nobject_max_side = 5\n";
}

TEST(CliRunTest, RunProbeMdCompare) {
  const fs::path dir = workdir() / "run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_config(dir / "dft.ini", "dft", dir / "dft");
  write_config(dir / "fixbc.ini", "fixbc", dir / "fixbc");
  Result r = cli("run " + (dir / "dft.ini").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("final mIoU"), std::string::npos);
  EXPECT_NE(r.out.find("incremental training time"), std::string::npos);
  ASSERT_EQ(cli("run " + (dir / "fixbc.ini").string()).code, 0);

  const ExperimentLog before = read_log(dir / "dft" / "experiment.json");
  r = cli("probe --run-dir " + (dir / "dft").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const ExperimentLog reprobed = read_log(dir / "dft" / "experiment.json");
  for (std::size_t i = 0; i < before.steps.size(); ++i) {
    EXPECT_EQ(reprobed.steps[i].probing->class_iou,
              before.steps[i].probing->class_iou);
  }
  r = cli("md --run-dir " + (dir / "dft").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const ExperimentLog remd = read_log(dir / "dft" / "experiment.json");
  ASSERT_EQ(remd.md.size(), before.md.size());
  for (std::size_t i = 0; i < remd.md.size(); ++i) {
    EXPECT_EQ(remd.md[i].value, before.md[i].value);
  }

  r = cli("compare " + (dir / "dft" / "experiment.json").string() + " " +
          (dir / "fixbc" / "experiment.json").string() + " --csv " +
          (dir / "cmp.csv").string() + " --svg " + (dir / "cmp.svg").string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(read_csv(dir / "cmp.csv").rows.size(), 2 * before.steps.size());
}

TEST(CliRunTest, JointRunWritesSingleRowCurve) {
  const fs::path dir = workdir() / "joint";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_config(dir / "joint.ini", "joint", dir / "out");
  ASSERT_EQ(cli("run " + (dir / "joint.ini").string()).code, 0);
  EXPECT_EQ(read_csv(dir / "out" / "curves.csv").rows.size(), 1u);
}

TEST(CliRunTest, ConfigErrorReportsLine) {
  const fs::path path = workdir() / "bad.ini";
  std::ofstream(path) << "[experiment]\nseed = 1\nstrategy = nope\n";
  const Result r = cli("run " + path.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("config: config error: line 3"), std::string::npos) << r.out;
}

TEST(CliCompareTest, MismatchedSchedulesFail) {
  const fs::path dir = workdir() / "mismatch";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_config(dir / "a.ini", "dft", dir / "a");
  write_config(dir / "b.ini", "dft", dir / "b", "1-1");
  ASSERT_EQ(cli("run " + (dir / "a.ini").string()).code, 0);
  ASSERT_EQ(cli("run " + (dir / "b.ini").string()).code, 0);
  const Result r = cli("compare " + (dir / "a" / "experiment.json").string() +
                       " " + (dir / "b" / "experiment.json").string() +
                       " --csv " + (dir / "c.csv").string() + " --svg " +
                       (dir / "c.svg").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("comparison error"), std::string::npos) << r.out;
}

TEST(CliTest, MissingSubcommandIsUsageError) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
}

}  // namespace
}  // namespace csslab
