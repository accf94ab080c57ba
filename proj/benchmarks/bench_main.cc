#include <vector>

#include <benchmark/benchmark.h>

#include "csslab/datagen.h"
#include "csslab/metrics.h"
#include "csslab/model.h"
#include "csslab/rng.h"
#include "csslab/trainer.h"

namespace {

using namespace csslab;

GeneratedData& reference_data() {
  static GeneratedData data = [] {
    SynthParams p;
    p.seed = 1;
    return generate_dataset(p);
  }();
  return data;
}

SegModel reference_model(int classes) {
  SegModel m = initial_model(ModelDims{}, Strategy::kDft, 1);
  std::vector<ClassId> ids;
  for (int c = 0; c < classes; ++c) ids.push_back(static_cast<ClassId>(c));
  RngStream rng(2);
  expand_classifier(m, ids, 1, rng);
  m.current_step = 1;
  return m;
}

void BM_Generate(benchmark::State& state) {
  SynthParams p;
  p.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_dataset(p));
  }
}
BENCHMARK(BM_Generate)->Unit(benchmark::kMillisecond);

void BM_Embed(benchmark::State& state) {
  const SegModel m = reference_model(11);
  const FeatureGrid& g = reference_data().train.images[0];
  for (auto _ : state) {
    benchmark::DoNotOptimize(embed(m.backbone(), g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.pixels()));
}
BENCHMARK(BM_Embed);

void BM_LossAndGrads(benchmark::State& state) {
  const SegModel m = reference_model(11);
  const auto& images = reference_data().train.images;
  const std::vector<FeatureGrid> batch(images.begin(), images.begin() + 8);
  const bool frozen = state.range(0) != 0;
  TrainableMask mask = all_trainable(m.params);
  if (frozen) {
    for (std::size_t i = 0; i < 4; ++i) mask[i] = false;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_grads(m, batch, mask));
  }
  state.SetLabel(frozen ? "backbone frozen" : "all trainable");
}
BENCHMARK(BM_LossAndGrads)->Arg(0)->Arg(1);

void BM_HeadLossAndGrads(benchmark::State& state) {
  const SegModel m = reference_model(11);
  const auto& images = reference_data().train.images;
  std::vector<Eigen::MatrixXd> z;
  std::vector<EmbeddedGrid> batch;
  for (int i = 0; i < 8; ++i) z.push_back(embed(m.backbone(), images[i]));
  for (int i = 0; i < 8; ++i) batch.push_back({&z[i], images[i].labels});
  TrainableMask mask = all_trainable(m.params);
  for (std::size_t i = 0; i < 4; ++i) mask[i] = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(head_loss_and_grads(m, batch, mask));
  }
}
BENCHMARK(BM_HeadLossAndGrads);

void BM_Confusion(benchmark::State& state) {
  const auto& images = reference_data().eval.images;
  RngStream rng(3);
  std::vector<std::vector<ClassId>> preds;
  for (const auto& g : images) {
    std::vector<ClassId> p;
    for (std::size_t i = 0; i < g.pixels(); ++i) {
      p.push_back(static_cast<ClassId>(rng.uniform_int(0, 10)));
    }
    preds.push_back(std::move(p));
  }
  for (auto _ : state) {
    ConfusionMatrix c(11);
    for (std::size_t i = 0; i < images.size(); ++i) {
      c += accumulate_confusion(preds[i], images[i].labels, 11);
    }
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_Confusion);

void BM_ReferenceStrategy(benchmark::State& state) {
  const auto strategy = static_cast<Strategy>(state.range(0));
  ExperimentConfig c;
  c.strategy = strategy;
  c.seed = 1;
  c.synth.seed = 1;
  const DataSplits data = load_data(c);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_experiment(c, data));
  }
  state.SetLabel(std::string(to_string(strategy)));
}
BENCHMARK(BM_ReferenceStrategy)
    ->Arg(static_cast<int>(Strategy::kDft))
    ->Arg(static_cast<int>(Strategy::kFixBCP))
    ->Unit(benchmark::kSecond)
    ->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
