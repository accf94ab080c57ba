#include "csslab/trainer.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <string>

#include "csslab/checkpoint.h"
#include "csslab/cssf.h"
#include "csslab/errors.h"
#include "csslab/report.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "trainer";
constexpr double kInitStd = 0.01;

Eigen::RowVectorXd fresh_row(Eigen::Index embed, RngStream& rng) {
  Eigen::RowVectorXd row(embed);
  for (Eigen::Index c = 0; c < embed; ++c) row(c) = rng.normal(0.0, kInitStd);
  return row;
}

Eigen::Index embed_dim(const SegModel& model) {
  return model.backbone().w2.rows();
}

// Moves the future rows of `classes` into a regular block for `step`.
// Returns false when the future block cannot supply them.
bool promote_future_rows(SegModel& model, const std::vector<ClassId>& classes,
                         int step) {
  auto& future = model.params.classifiers.future;
  if (!future || classes.empty()) return false;
  const auto n = static_cast<Eigen::Index>(classes.size());
  const bool reserve = !future->classes.empty() &&
                       future->classes.front() == kUnassignedRow;
  std::vector<Eigen::Index> take;
  if (reserve) {
    if (future->rows() < n) return false;
    for (Eigen::Index i = 0; i < n; ++i) take.push_back(i);
  } else {
    for (ClassId c : classes) {
      auto it = std::find(future->classes.begin(), future->classes.end(), c);
      if (it == future->classes.end()) return false;
      take.push_back(it - future->classes.begin());
    }
  }
  ClassifierBlock block;
  block.step = step;
  block.classes = classes;
  block.weight.resize(n, future->weight.cols());
  block.bias.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    block.weight.row(i) = future->weight.row(take[static_cast<std::size_t>(i)]);
    block.bias(i) = future->bias(take[static_cast<std::size_t>(i)]);
  }

  ClassifierBlock rest;
  rest.step = 0;
  for (Eigen::Index r = 0; r < future->rows(); ++r) {
    if (std::find(take.begin(), take.end(), r) != take.end()) continue;
    rest.classes.push_back(future->classes[static_cast<std::size_t>(r)]);
  }
  const auto kept = static_cast<Eigen::Index>(rest.classes.size());
  rest.weight.resize(kept, future->weight.cols());
  rest.bias.resize(kept);
  Eigen::Index out = 0;
  for (Eigen::Index r = 0; r < future->rows(); ++r) {
    if (std::find(take.begin(), take.end(), r) != take.end()) continue;
    rest.weight.row(out) = future->weight.row(r);
    rest.bias(out) = future->bias(r);
    ++out;
  }
  model.params.classifiers.blocks.push_back(std::move(block));
  if (kept > 0) {
    future = std::move(rest);
  } else {
    future.reset();
  }
  return true;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1a(std::uint64_t h, const T& value) {
  return fnv1a(h, &value, sizeof(T));
}

}  // namespace

double ExperimentLog::incremental_seconds() const {
  double s = 0.0;
  for (std::size_t i = 1; i < steps.size(); ++i) s += steps[i].seconds;
  return s;
}

double ExperimentLog::avg_trainable_params() const {
  if (steps.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    s += static_cast<double>(steps[i].trainable_params);
  }
  return s / static_cast<double>(steps.size() - 1);
}

DataSplits load_data(const ExperimentConfig& config) {
  if (config.use_synth) {
    GeneratedData g = generate_dataset(config.synth);
    return {std::move(g.train), std::move(g.eval)};
  }
  if (config.train_path.empty() || config.eval_path.empty()) {
    throw Error(kModule, ErrorKind::kConfig,
                "file data source needs both train_path and eval_path");
  }
  return {load_cssf(config.train_path), load_cssf(config.eval_path)};
}

void expand_classifier(SegModel& model, std::span<const ClassId> new_classes,
                       int step, RngStream& rng) {
  if (new_classes.empty()) return;
  auto& bank = model.params.classifiers;
  std::set<ClassId> unique;
  for (ClassId c : new_classes) {
    if (c == kIgnore || c == kUnassignedRow) {
      throw Error(kModule, ErrorKind::kState,
                  "reserved id " + std::to_string(c) + " cannot be a class");
    }
    if (!unique.insert(c).second || bank.contains(c)) {
      throw Error(kModule, ErrorKind::kState,
                  "duplicate class id " + std::to_string(c));
    }
  }
  const auto learned = bank.learned_classes();
  if (!learned.empty() && *unique.begin() <= learned.back()) {
    throw Error(kModule, ErrorKind::kState,
                "new classes must follow the learned ones in id order");
  }
  const Eigen::Index e = embed_dim(model);
  ClassifierBlock block;
  block.step = step;
  block.classes.assign(unique.begin(), unique.end());
  block.weight.resize(static_cast<Eigen::Index>(block.classes.size()), e);
  for (Eigen::Index r = 0; r < block.weight.rows(); ++r) {
    block.weight.row(r) = fresh_row(e, rng);
  }
  block.bias = Eigen::VectorXd::Zero(block.weight.rows());
  bank.blocks.push_back(std::move(block));
}

bool preallocate_future(SegModel& model, const ClassSchedule& schedule,
                        RngStream& rng, int reserve_rows) {
  if (model.strategy != Strategy::kFixBCP) {
    throw Error(kModule, ErrorKind::kState,
                "future pre-allocation requires strategy fixbc_p");
  }
  const int t = model.current_step;
  if (t >= schedule.num_steps()) {
    std::clog << "trainer: warning: step " << t
              << " is the last step; nothing to pre-allocate\n";
    return false;
  }
  auto& bank = model.params.classifiers;
  const Eigen::Index e = embed_dim(model);
  const auto& old = bank.future;

  ClassifierBlock future;
  future.step = 0;
  if (reserve_rows > 0) {
    future.classes.assign(static_cast<std::size_t>(reserve_rows),
                          kUnassignedRow);
  } else {
    future.classes = schedule.future_classes(t);
  }
  const auto n = static_cast<Eigen::Index>(future.classes.size());
  future.weight.resize(n, e);
  future.bias = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index from = -1;
    if (old) {
      if (reserve_rows > 0) {
        if (r < old->rows()) from = r;
      } else {
        auto it = std::find(old->classes.begin(), old->classes.end(),
                            future.classes[static_cast<std::size_t>(r)]);
        if (it != old->classes.end()) from = it - old->classes.begin();
      }
    }
    if (from >= 0) {
      future.weight.row(r) = old->weight.row(from);
      future.bias(r) = old->bias(from);
    } else {
      future.weight.row(r) = fresh_row(e, rng);
    }
  }
  bank.future = std::move(future);
  return true;
}

FreezePlan freeze_plan(Strategy strategy, int step) {
  if (step < 1) {
    throw Error(kModule, ErrorKind::kValidation,
                "step must be >= 1, got " + std::to_string(step));
  }
  FreezePlan all{true, true, true, true};
  if (step == 1) return all;
  switch (strategy) {
    case Strategy::kDft:
    case Strategy::kJoint:
      return all;
    case Strategy::kFixB:
      return {false, true, true, true};
    case Strategy::kFixBC:
    case Strategy::kFixBCP:
      return {false, false, true, true};
  }
  throw Error(kModule, ErrorKind::kConfig, "unknown strategy");
}

void apply_freeze_plan(SegModel& model, const FreezePlan& plan) {
  model.backbone_frozen = !plan.backbone;
  for (auto& b : model.params.classifiers.blocks) {
    b.frozen = b.step == model.current_step ? !plan.current_block
                                            : !plan.old_blocks;
  }
  if (model.params.classifiers.future) {
    model.params.classifiers.future->frozen = !plan.future_block;
  }
}

SegModel initial_model(const ModelDims& dims, Strategy strategy,
                       std::uint64_t seed) {
  RngStream rng(seed, StreamTag::kBackboneInit);
  SegModel model;
  model.params.backbone = init_backbone(dims, rng);
  model.strategy = strategy;
  return model;
}

void run_step(SegModel& model, const StepData& step_data,
              const ClassSchedule& schedule, const Hyper& hyper,
              std::uint64_t seed, const RunStepOptions& options) {
  const int t = step_data.step;
  if (t != model.current_step + 1) {
    throw Error(kModule, ErrorKind::kState,
                "model is at step " + std::to_string(model.current_step) +
                    ", cannot run step " + std::to_string(t));
  }
  model.current_step = t;
  const std::vector<ClassId>& classes = schedule.classes(t);
  if (!promote_future_rows(model, classes, t)) {
    RngStream rng(seed, StreamTag::kExpand, static_cast<std::uint64_t>(t));
    expand_classifier(model, classes, t, rng);
  }
  if (model.strategy == Strategy::kFixBCP && t >= 2 &&
      t < schedule.num_steps()) {
    RngStream rng(seed, StreamTag::kFuture, static_cast<std::uint64_t>(t));
    preallocate_future(model, schedule, rng, options.reserve_rows);
  }
  apply_freeze_plan(model, freeze_plan(model.strategy, t));
  RngStream shuffle(seed, StreamTag::kShuffle, static_cast<std::uint64_t>(t));
  train_sgd(model, step_data.images, hyper, hyper.epochs_per_step, shuffle);
}

MetricsReport evaluate_observed(const SegModel& model,
                                std::span<const FeatureGrid> eval,
                                const ClassSchedule& schedule, int step) {
  const std::vector<ClassId> seen = schedule.seen_classes(step);
  const int k = seen.back() + 1;
  std::vector<char> is_seen(65536, 0);
  for (ClassId c : seen) is_seen[c] = 1;
  ConfusionMatrix conf(k);
  std::vector<ClassId> labels;
  for (const auto& g : eval) {
    labels = g.labels;
    for (auto& l : labels) {
      if (l != kIgnore && !is_seen[l]) l = kIgnore;
    }
    conf += accumulate_confusion(predict_learned(model, g), labels, k);
  }
  return miou_groups(conf, schedule, step);
}

std::string step1_cache_key(const ExperimentConfig& config,
                            const Dataset& train,
                            const ClassSchedule& schedule) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  h = fnv1a(h, config.seed);
  h = fnv1a(h, config.dims.hidden_dim);
  h = fnv1a(h, config.dims.embed_dim);
  h = fnv1a(h, static_cast<std::uint8_t>(config.dims.local_context));
  const Hyper& hp = config.hyper;
  h = fnv1a(h, hp.lr0);
  h = fnv1a(h, hp.momentum);
  h = fnv1a(h, hp.weight_decay);
  h = fnv1a(h, hp.poly_power);
  h = fnv1a(h, hp.epochs_per_step);
  h = fnv1a(h, hp.batch_size);
  h = fnv1a(h, static_cast<std::uint8_t>(hp.poly_target));
  h = fnv1a(h, static_cast<std::uint8_t>(schedule.scenario));
  for (ClassId c : schedule.classes(1)) h = fnv1a(h, c);
  h = fnv1a(h, train.num_classes);
  h = fnv1a(h, train.feat_dim);
  for (const auto& g : train.images) {
    h = fnv1a(h, g.features.data(), g.features.size() * sizeof(float));
    h = fnv1a(h, g.labels.data(), g.labels.size() * sizeof(ClassId));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentLog run_experiment(const ExperimentConfig& config) {
  const DataSplits data = load_data(config);
  return run_experiment(config, data);
}

ExperimentLog run_experiment(const ExperimentConfig& config,
                             const DataSplits& data,
                             ExperimentArtifacts* artifacts) {
  validate(config.hyper);
  const int n = static_cast<int>(data.train.num_classes);
  if (data.eval.num_classes != data.train.num_classes ||
      data.eval.feat_dim != data.train.feat_dim) {
    throw Error(kModule, ErrorKind::kConfig,
                "train and eval splits disagree on classes or feature dim");
  }
  // Validates the setting against the data even for joint training.
  const ClassSchedule incremental =
      build_schedule(config.setting, n, config.scenario);
  const ClassSchedule schedule =
      config.strategy == Strategy::kJoint ? joint_schedule(n) : incremental;
  const TaskStream stream = make_task_stream(data.train, data.eval, schedule);

  ExperimentConfig echo = config;
  echo.dims.feat_dim = data.train.feat_dim;
  ExperimentLog log;
  log.config = echo;
  log.schedule = schedule;

  ExperimentArtifacts local;
  ExperimentArtifacts& art = artifacts ? *artifacts : local;
  art.snapshots.clear();
  art.probes.clear();

  SegModel model = initial_model(echo.dims, config.strategy, config.seed);
  std::filesystem::path cache_file;
  if (!config.cache_dir.empty() && config.strategy != Strategy::kJoint) {
    cache_file = config.cache_dir /
                 ("step1_" + step1_cache_key(echo, data.train, schedule) +
                  ".ckpt");
  }
  const RunStepOptions options{config.reserve_rows};
  const std::uint64_t probe_seed =
      derive_seed(config.seed, StreamTag::kProbeInit);

  for (int t = 1; t <= schedule.num_steps(); ++t) {
    const auto start = std::chrono::steady_clock::now();
    if (t == 1 && !cache_file.empty() && std::filesystem::exists(cache_file)) {
      model = load_checkpoint(cache_file);
      model.strategy = config.strategy;
      log.step1_from_cache = true;
    } else {
      run_step(model, stream.steps[static_cast<std::size_t>(t - 1)], schedule,
               config.hyper, config.seed, options);
      if (t == 1 && !cache_file.empty()) save_checkpoint(model, cache_file);
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;

    StepRecord rec;
    rec.step = t;
    rec.seconds = elapsed.count();
    rec.trainable_params = count_trainable(model);
    rec.observed = evaluate_observed(model, stream.eval, schedule, t);
    art.snapshots.push_back(model);
    if (config.probing) {
      ProbeResult probe = train_probe(model.backbone(), data.train.images,
                                      schedule, config.hyper, probe_seed, t);
      probe.report = probing_eval(model.backbone(), probe.probe, stream.eval,
                                  schedule);
      rec.probing = probe.report;
      art.probes.push_back(std::move(probe));
    }
    log.steps.push_back(std::move(rec));
  }

  if (config.md) {
    std::vector<ClassifierBlock> probe_blocks;
    for (const auto& p : art.probes) probe_blocks.push_back(p.probe);
    MdInputs in;
    in.schedule = &schedule;
    in.snapshots = art.snapshots;
    in.probes = probe_blocks;
    in.prototype_images = config.md_train_prototypes
                              ? std::span<const FeatureGrid>(data.train.images)
                              : std::span<const FeatureGrid>(data.eval.images);
    in.weights = config.md_weights;
    log.md = md_trajectory(in);
  }

  if (!config.output_dir.empty()) {
    write_report_bundle(log, config.output_dir);
    const auto snaps = config.output_dir / "snapshots";
    for (const auto& s : art.snapshots) {
      save_checkpoint(s, snaps / ("step_" + std::to_string(s.current_step) +
                                  ".ckpt"));
    }
    for (const auto& p : art.probes) {
      SegModel probe_model;
      probe_model.params.backbone =
          art.snapshots[static_cast<std::size_t>(p.step - 1)].backbone();
      probe_model.params.classifiers.blocks.push_back(p.probe);
      probe_model.backbone_frozen = true;
      probe_model.strategy = config.strategy;
      probe_model.current_step = p.step;
      save_checkpoint(probe_model,
                      snaps / ("probe_" + std::to_string(p.step) + ".ckpt"));
    }
  }
  return log;
}

}  // namespace csslab
