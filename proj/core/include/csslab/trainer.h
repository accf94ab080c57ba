#ifndef CSSLAB_TRAINER_H_
#define CSSLAB_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csslab/datagen.h"
#include "csslab/feature_grid.h"
#include "csslab/metrics.h"
#include "csslab/model.h"
#include "csslab/probing.h"
#include "csslab/schedule.h"
#include "csslab/task_stream.h"

namespace csslab {

struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::string setting = "5-1";
  Scenario scenario = Scenario::kOverlapped;
  Strategy strategy = Strategy::kDft;
  Hyper hyper;
  ModelDims dims;

  // Either synthesise (default) or read CSSF files.
  bool use_synth = true;
  SynthParams synth;
  std::filesystem::path train_path;
  std::filesystem::path eval_path;

  std::filesystem::path output_dir;  // empty: nothing written
  std::filesystem::path cache_dir;   // empty: step-1 model never reused
  bool probing = false;
  bool md = false;
  MdWeights md_weights = MdWeights::kCurrent;
  bool md_train_prototypes = false;  // default: eval split
  // > 0 keeps that many unbound pre-allocated rows instead of sizing the
  // future block from the known schedule (fixbc_p only).
  int reserve_rows = 0;
};

struct StepRecord {
  int step = 0;
  MetricsReport observed;
  std::optional<MetricsReport> probing;
  long trainable_params = 0;
  double seconds = 0.0;
};

struct ExperimentLog {
  ExperimentConfig config;
  ClassSchedule schedule;  // collapsed to one step for joint training
  std::vector<StepRecord> steps;
  std::vector<MdRecord> md;
  bool step1_from_cache = false;

  const MetricsReport& final_observed() const {
    return steps.back().observed;
  }
  // Steps 2..T only.
  double incremental_seconds() const;
  double avg_trainable_params() const;
};

struct ExperimentArtifacts {
  std::vector<SegModel> snapshots;  // [t-1]: after step t
  std::vector<ProbeResult> probes;  // [t-1]: probe on snapshot t
};

struct DataSplits {
  Dataset train;
  Dataset eval;
};

DataSplits load_data(const ExperimentConfig& config);

// Appends a freshly initialised block (weights N(0, 0.01^2), zero bias) for
// `new_classes`. An empty set leaves the model untouched.
void expand_classifier(SegModel& model, std::span<const ClassId> new_classes,
                       int step, RngStream& rng);

// Makes the future block cover C^{t+1:T} for t = model.current_step; rows
// already present keep their values. With reserve_rows > 0 the block holds
// that many unbound rows instead. Returns false (and warns) when there is no
// future left.
bool preallocate_future(SegModel& model, const ClassSchedule& schedule,
                        RngStream& rng, int reserve_rows = 0);

struct FreezePlan {
  bool backbone = true;
  bool old_blocks = true;
  bool current_block = true;
  bool future_block = false;

  friend bool operator==(const FreezePlan&, const FreezePlan&) = default;
};

FreezePlan freeze_plan(Strategy strategy, int step);
void apply_freeze_plan(SegModel& model, const FreezePlan& plan);

struct RunStepOptions {
  int reserve_rows = 0;
};

// Expands (or promotes future rows), applies the freeze plan, then runs
// epochs_per_step passes of SGD on the step's relabeled images.
void run_step(SegModel& model, const StepData& step_data,
              const ClassSchedule& schedule, const Hyper& hyper,
              std::uint64_t seed, const RunStepOptions& options = {});

SegModel initial_model(const ModelDims& dims, Strategy strategy,
                       std::uint64_t seed);

// Observed performance after step t: argmax over C^{1:t}; eval pixels of
// classes not yet introduced are ignored.
MetricsReport evaluate_observed(const SegModel& model,
                                std::span<const FeatureGrid> eval,
                                const ClassSchedule& schedule, int step);

ExperimentLog run_experiment(const ExperimentConfig& config);
ExperimentLog run_experiment(const ExperimentConfig& config,
                             const DataSplits& data,
                             ExperimentArtifacts* artifacts = nullptr);

// Key identifying a reusable step-1 model: seed, training data, dims, hyper
// and the initial class set.
std::string step1_cache_key(const ExperimentConfig& config,
                            const Dataset& train,
                            const ClassSchedule& schedule);

}  // namespace csslab

#endif  // CSSLAB_TRAINER_H_
