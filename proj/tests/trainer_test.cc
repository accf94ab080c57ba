#include <filesystem>
#include <vector>

#include <gtest/gtest.h>

#include "csslab/checkpoint.h"
#include "csslab/errors.h"
#include "csslab/rng.h"
#include "csslab/task_stream.h"
#include "csslab/trainer.h"
#include "oracles.h"

namespace csslab {
namespace {

std::vector<std::uint8_t> bytes_of(const BackboneParams& b) {
  SegModel m;
  m.params.backbone = b;
  return encode_checkpoint(m);
}

// Parameter values only; the frozen flag legitimately changes.
bool same_values(const ClassifierBlock& a, const ClassifierBlock& b) {
  return a.classes == b.classes && a.weight == b.weight && a.bias == b.bias;
}

TEST(ExpandTest, EmptySetLeavesModelUnchanged) {
  RngStream rng(1);
  SegModel m = oracle::random_model(rng, {3, 4, 5, false}, {{0, 1}});
  const ModelParams before = m.params;
  RngStream r(2);
  expand_classifier(m, {}, 2, r);
  EXPECT_TRUE(m.params == before);
  EXPECT_EQ(r.position(), 0u);
}

TEST(ExpandTest, SuccessiveExpansionsKeepIdOrder) {
  RngStream rng(1);
  SegModel m = oracle::random_model(rng, {3, 4, 5, false}, {{0, 1, 2}});
  const ClassifierBlock first = m.params.classifiers.blocks[0];
  const std::vector<ClassId> a{11}, b{12};
  expand_classifier(m, a, 2, rng);
  expand_classifier(m, b, 3, rng);
  EXPECT_EQ(active_classes(m.classifiers()),
            (std::vector<ClassId>{0, 1, 2, 11, 12}));
  EXPECT_TRUE(m.params.classifiers.blocks[0] == first);
  const auto& blk = m.params.classifiers.blocks[2];
  EXPECT_EQ(blk.step, 3);
  EXPECT_TRUE(blk.bias.isZero(0.0));
}

TEST(ExpandTest, ReplaysDocumentedDrawOrder) {
  RngStream rng(1);
  SegModel m = oracle::random_model(rng, {3, 4, 5, false}, {{0}});
  const std::vector<ClassId> ids{1, 2};
  RngStream r(77);
  expand_classifier(m, ids, 2, r);
  // Row-major N(0, 0.01^2) draws.
  RngStream replay(77);
  const auto& w = m.params.classifiers.blocks[1].weight;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      EXPECT_EQ(w(i, j), replay.normal(0.0, 0.01));
    }
  }
}

TEST(ExpandTest, DuplicateIdIsStateError) {
  RngStream rng(1);
  SegModel m = oracle::random_model(rng, {3, 4, 5, false}, {{0, 1}});
  const std::vector<ClassId> dup{1};
  try {
    expand_classifier(m, dup, 2, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
}

SegModel fixbcp_model_at(int step, const ClassSchedule& s) {
  RngStream rng(3);
  std::vector<std::vector<ClassId>> blocks;
  for (int t = 1; t <= step; ++t) blocks.push_back(s.classes(t));
  SegModel m = oracle::random_model(rng, {4, 6, 8, false}, blocks);
  m.strategy = Strategy::kFixBCP;
  return m;
}

TEST(PreallocateTest, StepThreeOfElevenHoldsStepsFourToEleven) {
  const ClassSchedule s = build_schedule("10-1", 20, Scenario::kOverlapped);
  SegModel m = fixbcp_model_at(3, s);
  RngStream rng(4);
  ASSERT_TRUE(preallocate_future(m, s, rng));
  ASSERT_TRUE(m.classifiers().future.has_value());
  EXPECT_EQ(m.classifiers().future->classes, s.classes_between(4, 11));
  apply_freeze_plan(m, freeze_plan(Strategy::kFixBCP, 3));
  const long e = 8;
  EXPECT_EQ(count_trainable(m), 1 * (e + 1) + 8 * (e + 1));
}

TEST(PreallocateTest, LastStepIsNoOp) {
  const ClassSchedule s = build_schedule("2-1", 4, Scenario::kOverlapped);
  SegModel m = fixbcp_model_at(3, s);
  RngStream rng(4);
  EXPECT_FALSE(preallocate_future(m, s, rng));
  EXPECT_FALSE(m.classifiers().future.has_value());
}

TEST(PreallocateTest, ReserveRowsAreUnbound) {
  const ClassSchedule s = build_schedule("2-1", 4, Scenario::kOverlapped);
  SegModel m = fixbcp_model_at(2, s);
  RngStream rng(4);
  ASSERT_TRUE(preallocate_future(m, s, rng, 5));
  EXPECT_EQ(m.classifiers().future->classes,
            std::vector<ClassId>(5, kUnassignedRow));
}

TEST(FreezePlanTest, StepOneTrainsEverything) {
  for (Strategy st : {Strategy::kDft, Strategy::kFixB, Strategy::kFixBC,
                      Strategy::kFixBCP, Strategy::kJoint}) {
    EXPECT_EQ(freeze_plan(st, 1), (FreezePlan{true, true, true, true}));
  }
}

TEST(FreezePlanTest, LaterSteps) {
  EXPECT_EQ(freeze_plan(Strategy::kDft, 4), (FreezePlan{true, true, true, true}));
  EXPECT_EQ(freeze_plan(Strategy::kFixB, 5), (FreezePlan{false, true, true, true}));
  EXPECT_EQ(freeze_plan(Strategy::kFixBC, 2).backbone, false);
  EXPECT_EQ(freeze_plan(Strategy::kFixBC, 2).old_blocks, false);
  EXPECT_EQ(freeze_plan(Strategy::kFixBCP, 3).future_block, true);
}

// Small synthetic setup shared by the run_step and run_experiment tests.
ExperimentConfig small_config(Strategy strategy, std::uint64_t seed = 3) {
  ExperimentConfig c;
  c.seed = seed;
  c.setting = "2-1";
  c.strategy = strategy;
  c.dims = {6, 10, 6, false};
  c.hyper.epochs_per_step = 4;
  c.synth.num_classes = 4;
  c.synth.feat_dim = 6;
  c.synth.height = c.synth.width = 8;
  c.synth.images_per_class = 3;
  c.synth.eval_images_per_class = 2;
  c.synth.object_max_side = 5;
  c.synth.seed = seed;
  return c;
}

TEST(RunStepTest, ZeroLearningRateOnlyExpands) {
  const ExperimentConfig c = small_config(Strategy::kDft);
  const DataSplits data = load_data(c);
  const ClassSchedule s = build_schedule(c.setting, 4, c.scenario);
  const TaskStream ts = make_task_stream(data.train, data.eval, s);
  SegModel m = initial_model(c.dims, c.strategy, c.seed);
  Hyper h = c.hyper;
  run_step(m, ts.steps[0], s, h, c.seed);
  h.lr0 = 0.0;
  const ModelParams before = m.params;
  run_step(m, ts.steps[1], s, h, c.seed);
  EXPECT_TRUE(m.params.backbone == before.backbone);
  EXPECT_TRUE(m.params.classifiers.blocks[0] == before.classifiers.blocks[0]);
  RngStream rng(c.seed, StreamTag::kExpand, 2);
  SegModel expected;
  expected.params = before;
  expand_classifier(expected, s.classes(2), 2, rng);
  EXPECT_TRUE(m.params.classifiers.blocks[1].weight ==
              expected.params.classifiers.blocks[1].weight);
}

TEST(RunStepTest, FixbcKeepsBackboneBytes) {
  const ExperimentConfig c = small_config(Strategy::kFixBC);
  const DataSplits data = load_data(c);
  const ClassSchedule s = build_schedule(c.setting, 4, c.scenario);
  const TaskStream ts = make_task_stream(data.train, data.eval, s);
  SegModel m = initial_model(c.dims, c.strategy, c.seed);
  run_step(m, ts.steps[0], s, c.hyper, c.seed);
  const auto bytes = bytes_of(m.backbone());
  run_step(m, ts.steps[1], s, c.hyper, c.seed);
  EXPECT_EQ(bytes_of(m.backbone()), bytes);
}

TEST(RunStepTest, OutOfOrderStepIsStateError) {
  const ExperimentConfig c = small_config(Strategy::kDft);
  const DataSplits data = load_data(c);
  const ClassSchedule s = build_schedule(c.setting, 4, c.scenario);
  const TaskStream ts = make_task_stream(data.train, data.eval, s);
  SegModel m = initial_model(c.dims, c.strategy, c.seed);
  try {
    run_step(m, ts.steps[1], s, c.hyper, c.seed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kState);
  }
}

TEST(RunStepTest, SingleImageMatchesHandDrivenSequence) {
  const ExperimentConfig c = small_config(Strategy::kDft);
  const DataSplits data = load_data(c);
  const ClassSchedule s = build_schedule(c.setting, 4, c.scenario);
  StepData step;
  step.step = 1;
  step.source_indices = {0};
  step.images = {relabel_for_step(data.train.images[0], s.classes(1))};
  Hyper h = c.hyper;
  h.epochs_per_step = 1;
  h.batch_size = 1;

  SegModel m = initial_model(c.dims, c.strategy, c.seed);
  SegModel ref = m;
  run_step(m, step, s, h, c.seed);

  ref.current_step = 1;
  RngStream rng(c.seed, StreamTag::kExpand, 1);
  expand_classifier(ref, s.classes(1), 1, rng);
  const TrainableMask mask = all_trainable(ref.params);
  const LossAndGrads lg = loss_and_grads(ref, step.images, mask);
  ModelParams v = zeros_like(ref.params);
  sgd_step(ref.params, lg.grads, v,
           {poly_lr(h.lr0, 0, 1, h.poly_power), h.momentum, h.weight_decay},
           mask);
  EXPECT_TRUE(m.params == ref.params);
}

TEST(RunStepTest, FutureRowsTrainWhileOldBlocksStayFixed) {
  const ExperimentConfig c = small_config(Strategy::kFixBCP);
  const DataSplits data = load_data(c);
  const ClassSchedule s = build_schedule(c.setting, 4, c.scenario);
  const TaskStream ts = make_task_stream(data.train, data.eval, s);
  SegModel m = initial_model(c.dims, c.strategy, c.seed);
  run_step(m, ts.steps[0], s, c.hyper, c.seed);
  EXPECT_FALSE(m.classifiers().future.has_value());
  const ModelParams after1 = m.params;
  run_step(m, ts.steps[1], s, c.hyper, c.seed);
  ASSERT_TRUE(m.classifiers().future.has_value());
  EXPECT_EQ(m.classifiers().future->classes, s.classes(3));

  // Initial future rows: the same draws run_step made.
  SegModel init;
  init.strategy = Strategy::kFixBCP;
  init.params = after1;
  init.current_step = 2;
  RngStream expand(c.seed, StreamTag::kExpand, 2);
  expand_classifier(init, s.classes(2), 2, expand);
  RngStream fut(c.seed, StreamTag::kFuture, 2);
  preallocate_future(init, s, fut);
  EXPECT_FALSE(m.classifiers().future->weight ==
               init.classifiers().future->weight);
  EXPECT_TRUE(same_values(m.classifiers().blocks[0], after1.classifiers.blocks[0]));
  EXPECT_TRUE(m.backbone() == after1.backbone);

  // Promotion keeps the trained values.
  const ClassifierBlock trained_future = *m.classifiers().future;
  Hyper zero = c.hyper;
  zero.lr0 = 0.0;
  run_step(m, ts.steps[2], s, zero, c.seed);
  EXPECT_FALSE(m.classifiers().future.has_value());
  EXPECT_TRUE(m.classifiers().blocks[2].weight == trained_future.weight);
  EXPECT_TRUE(m.classifiers().blocks[2].bias == trained_future.bias);
}

TEST(RunExperimentTest, JointRunHasOneStep) {
  ExperimentConfig c = small_config(Strategy::kJoint);
  const ExperimentLog log = run_experiment(c);
  ASSERT_EQ(log.steps.size(), 1u);
  EXPECT_EQ(log.incremental_seconds(), 0.0);
  EXPECT_EQ(log.schedule.num_steps(), 1);
}

TEST(RunExperimentTest, StrategiesShareTheStepOneCheckpoint) {
  const auto cache = std::filesystem::temp_directory_path() / "csslab_test_cache";
  std::filesystem::remove_all(cache);
  ExperimentConfig a = small_config(Strategy::kDft);
  a.cache_dir = cache;
  ExperimentConfig b = small_config(Strategy::kFixBC);
  b.cache_dir = cache;
  const ExperimentLog la = run_experiment(a);
  const ExperimentLog lb = run_experiment(b);
  EXPECT_FALSE(la.step1_from_cache);
  EXPECT_TRUE(lb.step1_from_cache);
  EXPECT_EQ(la.steps[0].observed.miou_all, lb.steps[0].observed.miou_all);
  // And the cache does not change results.
  ExperimentConfig c = small_config(Strategy::kFixBC);
  EXPECT_EQ(run_experiment(c).final_observed().miou_all,
            lb.final_observed().miou_all);
  std::filesystem::remove_all(cache);
}

TEST(RunExperimentTest, DeterministicMetrics) {
  ExperimentConfig c = small_config(Strategy::kFixBCP, 9);
  c.probing = true;
  c.md = true;
  const ExperimentLog a = run_experiment(c);
  const ExperimentLog b = run_experiment(c);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].observed.class_iou, b.steps[i].observed.class_iou);
    EXPECT_EQ(a.steps[i].probing->class_iou, b.steps[i].probing->class_iou);
    EXPECT_EQ(a.steps[i].trainable_params, b.steps[i].trainable_params);
  }
  ASSERT_EQ(a.md.size(), b.md.size());
  for (std::size_t i = 0; i < a.md.size(); ++i) {
    EXPECT_EQ(a.md[i].value, b.md[i].value);
  }
}

TEST(RunExperimentTest, ProbingDoesNotPerturbTrajectory) {
  ExperimentConfig c = small_config(Strategy::kDft, 4);
  const ExperimentLog plain = run_experiment(c);
  c.probing = true;
  const ExperimentLog probed = run_experiment(c);
  EXPECT_EQ(plain.final_observed().class_iou, probed.final_observed().class_iou);
}

TEST(RunExperimentTest, ObservedClassCoverageGrowsByStep) {
  for (Strategy st : {Strategy::kDft, Strategy::kFixB, Strategy::kFixBC,
                      Strategy::kFixBCP}) {
    ExperimentArtifacts art;
    const ExperimentConfig c = small_config(st);
    const ExperimentLog log = run_experiment(c, load_data(c), &art);
    for (int t = 1; t <= log.schedule.num_steps(); ++t) {
      EXPECT_EQ(art.snapshots[static_cast<std::size_t>(t - 1)]
                    .classifiers().learned_classes(),
                log.schedule.seen_classes(t));
      const auto& iou = log.steps[static_cast<std::size_t>(t - 1)].observed.class_iou;
      const auto seen = log.schedule.seen_classes(t);
      EXPECT_EQ(iou.size(), static_cast<std::size_t>(seen.back()) + 1);
    }
  }
}

TEST(RunExperimentTest, FrozenPartsBitIdenticalAcrossSteps) {
  for (Strategy st : {Strategy::kFixB, Strategy::kFixBC, Strategy::kFixBCP}) {
    ExperimentArtifacts art;
    ExperimentConfig c = small_config(st);
    c.setting = "1-1";
    const ExperimentLog log = run_experiment(c, load_data(c), &art);
    const SegModel& first = art.snapshots.front();
    for (std::size_t t = 1; t < art.snapshots.size(); ++t) {
      const SegModel& now = art.snapshots[t];
      EXPECT_EQ(bytes_of(now.backbone()), bytes_of(first.backbone()));
      if (st == Strategy::kFixB) continue;
      for (std::size_t b = 0; b < t; ++b) {
        EXPECT_TRUE(same_values(now.classifiers().blocks[b],
                                art.snapshots[b].classifiers().blocks[b]))
            << "block " << b + 1 << " after step " << t + 1;
      }
    }
  }
}

TEST(RunExperimentTest, FixbcpTrainableCountMatchesClosedForm) {
  ExperimentConfig c = small_config(Strategy::kFixBCP);
  c.setting = "1-1";
  const ExperimentLog log = run_experiment(c);
  const long e1 = c.dims.embed_dim + 1;
  const int steps = log.schedule.num_steps();
  double closed = 0.0;
  for (int t = 2; t <= steps; ++t) {
    const long n = static_cast<long>(log.schedule.classes(t).size()) +
                   static_cast<long>(log.schedule.future_classes(t).size());
    EXPECT_EQ(log.steps[static_cast<std::size_t>(t - 1)].trainable_params, n * e1);
    closed += static_cast<double>(n * e1);
  }
  EXPECT_DOUBLE_EQ(log.avg_trainable_params(), closed / (steps - 1));
}

TEST(RunExperimentTest, DftForgetsOnDefaultBenchmark) {
  ExperimentConfig c;
  c.seed = 1;
  c.synth.seed = 1;
  const ExperimentLog log = run_experiment(c);
  ASSERT_EQ(log.steps.size(), 6u);
  EXPECT_LT(*log.final_observed().miou_init, *log.steps[0].observed.miou_init);
}

TEST(RunExperimentTest, MismatchedSettingIsScheduleError) {
  ExperimentConfig c = small_config(Strategy::kDft);
  c.setting = "3-2";
  try {
    run_experiment(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchedule);
  }
}

}  // namespace
}  // namespace csslab
