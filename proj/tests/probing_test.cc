#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "csslab/checkpoint.h"
#include "csslab/datagen.h"
#include "csslab/errors.h"
#include "csslab/metrics.h"
#include "csslab/probing.h"
#include "csslab/trainer.h"
#include "oracles.h"

namespace csslab {
namespace {

Hyper quick_hyper() {
  Hyper h;
  h.epochs_per_step = 5;
  return h;
}

TEST(ProbeHyperTest, DoublesEpochs) {
  Hyper h;
  h.epochs_per_step = 7;
  const Hyper p = probe_hyper(h);
  EXPECT_EQ(p.epochs_per_step, 14);
  EXPECT_EQ(p.lr0, h.lr0);
  EXPECT_EQ(p.batch_size, h.batch_size);
}

TEST(TrainProbeTest, SnapshotUntouchedAndCoversAllClasses) {
  SynthParams p;
  p.num_classes = 4;
  p.feat_dim = 5;
  p.height = p.width = 8;
  p.images_per_class = 3;
  p.object_max_side = 5;
  p.seed = 2;
  const GeneratedData d = generate_dataset(p);
  RngStream rng(3);
  const BackboneParams b = init_backbone({5, 8, 6, false}, rng);
  const BackboneParams copy = b;
  const ClassSchedule s = build_schedule("2-1", 4, Scenario::kOverlapped);
  const ProbeResult r = train_probe(b, d.train.images, s, quick_hyper(), 11, 2);
  EXPECT_TRUE(b == copy);
  EXPECT_EQ(r.probe.classes, s.all_classes());
  EXPECT_EQ(r.step, 2);
  // Same seed, same probe.
  const ProbeResult again = train_probe(b, d.train.images, s, quick_hyper(), 11, 2);
  EXPECT_TRUE(again.probe == r.probe);
}

TEST(TrainProbeTest, SeparableDataReachesFullTrainingAccuracy) {
  SynthParams p;
  p.num_classes = 4;
  p.feat_dim = 8;
  p.height = p.width = 8;
  p.images_per_class = 3;
  p.object_max_side = 5;
  p.noise_sigma = 0.0;
  p.mixing_depth = 0;
  p.seed = 5;
  const GeneratedData d = generate_dataset(p);
  RngStream rng(6);
  const BackboneParams b = init_backbone({8, 32, 16, false}, rng);
  const ClassSchedule s = build_schedule("2-1", 4, Scenario::kOverlapped);
  Hyper h;
  h.lr0 = 0.5;
  h.epochs_per_step = 150;
  const ProbeResult r = train_probe(b, d.train.images, s, h, 1);
  EXPECT_EQ(r.train_pixel_accuracy, 1.0);
}

TEST(TrainProbeTest, MissingClassNamesTheClass) {
  SynthParams p;
  p.num_classes = 3;
  p.feat_dim = 4;
  p.height = p.width = 6;
  p.images_per_class = 2;
  p.object_max_side = 4;
  p.seed = 1;
  GeneratedData d = generate_dataset(p);
  for (auto& g : d.train.images) {
    for (auto& l : g.labels) {
      if (l == 3) l = 0;
    }
  }
  RngStream rng(1);
  const BackboneParams b = init_backbone({4, 5, 3, false}, rng);
  const ClassSchedule s = build_schedule("2-1", 3, Scenario::kOverlapped);
  try {
    train_probe(b, d.train.images, s, quick_hyper(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProbe);
    EXPECT_NE(e.detail().find('3'), std::string::npos) << e.what();
  }
}

TEST(ProbingEvalTest, OneHotOracleProbeScoresHundred) {
  // Features are one-hot class codes; identity backbone keeps them.
  const int k = 4;
  BackboneParams b;
  b.w1 = Eigen::MatrixXd::Identity(k, k);
  b.b1 = Eigen::VectorXd::Zero(k);
  b.w2 = Eigen::MatrixXd::Identity(k, k);
  b.b2 = Eigen::VectorXd::Zero(k);
  FeatureGrid g;
  g.height = 2;
  g.width = 4;
  g.feat_dim = k;
  for (int p = 0; p < 8; ++p) {
    const int c = p % k;
    for (int j = 0; j < k; ++j) g.features.push_back(j == c ? 1.f : 0.f);
    g.labels.push_back(static_cast<ClassId>(c));
  }
  ClassifierBlock probe;
  probe.classes = {0, 1, 2, 3};
  probe.weight = Eigen::MatrixXd::Identity(k, k);
  probe.bias = Eigen::VectorXd::Zero(k);
  const ClassSchedule s = build_schedule("1-1", 3, Scenario::kOverlapped);
  const std::vector<FeatureGrid> eval{g};
  const MetricsReport r = probing_eval(b, probe, eval, s);
  EXPECT_DOUBLE_EQ(*r.miou_all, 100.0);
}

TEST(ProbingEvalTest, MatchesIndependentConfusion) {
  RngStream rng(8);
  const SegModel m = oracle::random_model(rng, {4, 6, 5, false}, {{0, 1, 2, 3, 4}});
  const ClassSchedule s = build_schedule("2-2", 4, Scenario::kOverlapped);
  const std::vector<ClassId> classes{0, 1, 2, 3, 4};
  std::vector<FeatureGrid> eval;
  for (int i = 0; i < 4; ++i) {
    eval.push_back(oracle::random_grid(rng, 4, 4, 4, classes, true));
  }
  const ClassifierBlock& probe = m.classifiers().blocks[0];
  const MetricsReport r = probing_eval(m.backbone(), probe, eval, s);

  std::vector<ClassId> preds, labels;
  for (const auto& g : eval) {
    for (const auto& l : oracle::logits(m, g)) {
      preds.push_back(static_cast<ClassId>(
          std::max_element(l.begin(), l.end()) - l.begin()));
    }
    labels.insert(labels.end(), g.labels.begin(), g.labels.end());
  }
  const oracle::Vec iou = oracle::iou(oracle::confusion(preds, labels, 5));
  double sum = 0.0;
  int n = 0;
  for (double v : iou) {
    if (v >= 0.0) {
      sum += v;
      ++n;
    }
  }
  EXPECT_NEAR(*r.miou_all, 100.0 * sum / n, 1e-12);
}

TEST(ProbingRunTest, FixbcProbeIsConstantAcrossSteps) {
  ExperimentConfig c;
  c.seed = 4;
  c.setting = "2-1";
  c.strategy = Strategy::kFixBC;
  c.probing = true;
  c.dims = {6, 10, 6, false};
  c.hyper.epochs_per_step = 3;
  c.synth.num_classes = 4;
  c.synth.feat_dim = 6;
  c.synth.height = c.synth.width = 8;
  c.synth.images_per_class = 3;
  c.synth.object_max_side = 5;
  c.synth.seed = 4;
  const ExperimentLog log = run_experiment(c);
  for (const auto& s : log.steps) {
    EXPECT_EQ(s.probing->class_iou, log.steps[0].probing->class_iou);
  }
}

}  // namespace
}  // namespace csslab
