#ifndef CSSLAB_TOOLS_COMMANDS_H_
#define CSSLAB_TOOLS_COMMANDS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace csslab::cli {

struct GenOptions {
  int classes = 10;
  int feat_dim = 16;
  int size = 16;
  int images = 8;  // training images per class
  int eval_images = 4;
  std::uint64_t seed = 0;
  double noise = 0.2;
  std::filesystem::path out;
  std::filesystem::path eval_out;  // default: <out stem>.eval.cssf
};

struct ProbeOptions {
  std::filesystem::path run_dir;
};

struct MdOptions {
  std::filesystem::path run_dir;
  std::string weights = "current";   // current | frozen
  std::string prototypes = "eval";   // eval | train
  bool no_probes = false;
};

struct CompareOptions {
  std::vector<std::filesystem::path> logs;
  std::filesystem::path out_csv = "compare.csv";
  std::filesystem::path out_svg = "compare.svg";
};

int cmd_gen(const GenOptions& options);
int cmd_run(const std::filesystem::path& config_path);
int cmd_probe(const ProbeOptions& options);
int cmd_md(const MdOptions& options);
int cmd_compare(const CompareOptions& options);

}  // namespace csslab::cli

#endif  // CSSLAB_TOOLS_COMMANDS_H_
