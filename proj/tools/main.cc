#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "csslab/errors.h"

int main(int argc, char** argv) {
  using namespace csslab::cli;
  CLI::App app{"csslab: desk-scale continual semantic segmentation lab"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic CSSF dataset");
  g->add_option("--classes", gen.classes, "Foreground classes N")
      ->check(CLI::Range(1, 65533));
  g->add_option("--feat-dim", gen.feat_dim, "Feature dimension d")
      ->check(CLI::Range(1, 4096));
  g->add_option("--size", gen.size, "Grid height and width")
      ->check(CLI::Range(1, 4096));
  g->add_option("--images", gen.images, "Training images per class")
      ->check(CLI::Range(1, 100000));
  g->add_option("--eval-images", gen.eval_images, "Eval images per class")
      ->check(CLI::Range(1, 100000));
  g->add_option("--noise", gen.noise, "Per-feature noise sigma")
      ->check(CLI::Range(0.0, 1e6));
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Training split output path")->required();
  g->add_option("--eval-out", gen.eval_out, "Eval split output path");

  std::filesystem::path config_path;
  auto* r = app.add_subcommand("run", "Run an experiment from a config file");
  r->add_option("config", config_path, "Config file")->required();

  ProbeOptions probe;
  auto* p = app.add_subcommand("probe", "Re-run probing on saved snapshots");
  p->add_option("--run-dir", probe.run_dir, "Experiment output directory")
      ->required();

  MdOptions md;
  auto* m = app.add_subcommand("md", "Re-run moving distance on snapshots");
  m->add_option("--run-dir", md.run_dir, "Experiment output directory")
      ->required();
  m->add_option("--weights", md.weights, "current | frozen")
      ->check(CLI::IsMember({"current", "frozen"}));
  m->add_option("--prototypes", md.prototypes, "eval | train")
      ->check(CLI::IsMember({"eval", "train"}));
  m->add_flag("--no-probes", md.no_probes, "Observed MD only");

  CompareOptions cmp;
  auto* c = app.add_subcommand("compare", "Overlay step-wise curves");
  c->add_option("logs", cmp.logs, "experiment.json files")->required();
  c->add_option("--csv", cmp.out_csv, "Combined CSV output");
  c->add_option("--svg", cmp.out_svg, "SVG overlay output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(config_path);
    if (p->parsed()) return cmd_probe(probe);
    if (m->parsed()) return cmd_md(md);
    if (c->parsed()) return cmd_compare(cmp);
  } catch (const csslab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
