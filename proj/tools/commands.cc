#include "commands.h"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "csslab/checkpoint.h"
#include "csslab/config.h"
#include "csslab/cssf.h"
#include "csslab/datagen.h"
#include "csslab/errors.h"
#include "csslab/metrics.h"
#include "csslab/probing.h"
#include "csslab/report.h"
#include "csslab/rng.h"
#include "csslab/task_stream.h"
#include "csslab/trainer.h"

namespace csslab::cli {
namespace {

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

void print_histogram(const char* label, const Dataset& data) {
  const auto hist = class_histogram(data);
  std::cout << label << ": " << data.images.size() << " images, "
            << data.height << "x" << data.width << ", d=" << data.feat_dim
            << "\n";
  std::cout << "  class  pixels\n";
  for (std::size_t c = 0; c < hist.size(); ++c) {
    std::printf("  %5zu  %llu\n", c, static_cast<unsigned long long>(hist[c]));
  }
}

struct RunDir {
  ExperimentLog log;
  DataSplits data;
  std::vector<SegModel> snapshots;
};

RunDir open_run_dir(const std::filesystem::path& dir) {
  RunDir run;
  run.log = read_log(dir / "experiment.json");
  run.data = load_data(run.log.config);
  for (const auto& rec : run.log.steps) {
    run.snapshots.push_back(load_checkpoint(
        dir / "snapshots" / ("step_" + std::to_string(rec.step) + ".ckpt")));
  }
  return run;
}

void save_probe(const SegModel& snapshot, const ProbeResult& probe,
                const std::filesystem::path& path) {
  SegModel m;
  m.params.backbone = snapshot.backbone();
  m.params.classifiers.blocks.push_back(probe.probe);
  m.backbone_frozen = true;
  m.strategy = snapshot.strategy;
  m.current_step = probe.step;
  save_checkpoint(m, path);
}

}  // namespace

int cmd_gen(const GenOptions& o) {
  SynthParams p;
  p.num_classes = static_cast<std::uint32_t>(o.classes);
  p.feat_dim = static_cast<std::uint32_t>(o.feat_dim);
  p.height = p.width = static_cast<std::uint32_t>(o.size);
  p.images_per_class = static_cast<std::uint32_t>(o.images);
  p.eval_images_per_class = static_cast<std::uint32_t>(o.eval_images);
  p.noise_sigma = o.noise;
  p.seed = o.seed;
  p.object_max_side = std::min<std::uint32_t>(p.object_max_side, p.height);
  p.object_min_side = std::min(p.object_min_side, p.object_max_side);
  const GeneratedData data = generate_dataset(p);

  std::filesystem::path eval_out = o.eval_out;
  if (eval_out.empty()) {
    eval_out = o.out;
    eval_out.replace_extension(".eval.cssf");
  }
  save_cssf(data.train, o.out);
  save_cssf(data.eval, eval_out);
  print_histogram(o.out.string().c_str(), data.train);
  print_histogram(eval_out.string().c_str(), data.eval);
  return 0;
}

int cmd_run(const std::filesystem::path& config_path) {
  const ExperimentConfig config = load_config(config_path);
  const ExperimentLog log = run_experiment(config);
  const MetricsReport& f = log.final_observed();
  std::cout << display_name(log) << " (" << to_string(log.config.strategy)
            << ", " << log.schedule.setting << ", "
            << to_string(log.schedule.scenario) << ", T="
            << log.schedule.num_steps() << ")\n";
  std::cout << "final mIoU  init " << pct(f.miou_init) << "  incr "
            << pct(f.miou_incr) << "  all " << pct(f.miou_all) << "\n";
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.1f", log.incremental_seconds());
  std::cout << "incremental training time " << secs << " s\n";
  if (!config.output_dir.empty()) {
    std::cout << "report written to " << config.output_dir.string() << "\n";
  }
  return 0;
}

int cmd_probe(const ProbeOptions& o) {
  RunDir run = open_run_dir(o.run_dir);
  const ClassSchedule& schedule = run.log.schedule;
  const TaskStream stream =
      make_task_stream(run.data.train, run.data.eval, schedule);
  const std::uint64_t probe_seed =
      derive_seed(run.log.config.seed, StreamTag::kProbeInit);
  for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
    const SegModel& snap = run.snapshots[i];
    ProbeResult probe =
        train_probe(snap.backbone(), run.data.train.images, schedule,
                    run.log.config.hyper, probe_seed, run.log.steps[i].step);
    probe.report =
        probing_eval(snap.backbone(), probe.probe, stream.eval, schedule);
    run.log.steps[i].probing = probe.report;
    save_probe(snap, probe,
               o.run_dir / "snapshots" /
                   ("probe_" + std::to_string(probe.step) + ".ckpt"));
    std::cout << "step " << probe.step << "  probe mIoU all "
              << pct(probe.report.miou_all) << "  init "
              << pct(probe.report.miou_init) << "  incr "
              << pct(probe.report.miou_incr) << "\n";
  }
  run.log.config.probing = true;
  write_report_bundle(run.log, o.run_dir);
  return 0;
}

int cmd_md(const MdOptions& o) {
  RunDir run = open_run_dir(o.run_dir);
  std::vector<ClassifierBlock> probes;
  if (!o.no_probes) {
    for (const auto& rec : run.log.steps) {
      const auto path = o.run_dir / "snapshots" /
                        ("probe_" + std::to_string(rec.step) + ".ckpt");
      if (!std::filesystem::exists(path)) {
        probes.clear();
        break;
      }
      probes.push_back(load_checkpoint(path).classifiers().blocks.at(0));
    }
  }
  MdInputs in;
  in.schedule = &run.log.schedule;
  in.snapshots = run.snapshots;
  in.probes = probes;
  const bool train_protos = o.prototypes == "train";
  in.prototype_images = train_protos
                            ? std::span<const FeatureGrid>(run.data.train.images)
                            : std::span<const FeatureGrid>(run.data.eval.images);
  in.weights =
      o.weights == "frozen" ? MdWeights::kFrozenAtT : MdWeights::kCurrent;
  run.log.md = md_trajectory(in);
  run.log.config.md = true;
  run.log.config.md_weights = in.weights;
  run.log.config.md_train_prototypes = train_protos;
  write_report_bundle(run.log, o.run_dir);

  std::cout << "source    t  k  MD\n";
  for (const auto& r : run.log.md) {
    std::printf("%-8s %2d %2d  %.6f\n", std::string(to_string(r.source)).c_str(),
                r.t, r.k, r.value);
  }
  return 0;
}

int cmd_compare(const CompareOptions& o) {
  std::vector<ExperimentLog> logs;
  for (const auto& path : o.logs) logs.push_back(read_log(path));
  const Comparison cmp = compare_logs(logs);
  write_text(o.out_csv, cmp.csv);
  write_text(o.out_svg, cmp.svg);
  std::cout << "compared " << logs.size() << " experiments -> "
            << o.out_csv.string() << ", " << o.out_svg.string() << "\n";
  return 0;
}

}  // namespace csslab::cli
