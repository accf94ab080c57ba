#include "csslab/probing.h"

#include <string>

#include "csslab/errors.h"
#include "csslab/rng.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "probing";

ClassifierBank single_block_bank(const ClassifierBlock& probe) {
  ClassifierBank bank;
  bank.blocks.push_back(probe);
  return bank;
}

}  // namespace

Hyper probe_hyper(const Hyper& hyper) {
  Hyper h = hyper;
  h.epochs_per_step = 2 * hyper.epochs_per_step;
  return h;
}

ProbeResult train_probe(const BackboneParams& backbone,
                        std::span<const FeatureGrid> full_train,
                        const ClassSchedule& schedule, const Hyper& hyper,
                        std::uint64_t probe_seed, int step) {
  const std::vector<ClassId> classes = schedule.all_classes();
  std::vector<std::uint64_t> seen(classes.back() + 1u, 0);
  for (const auto& g : full_train) {
    for (ClassId l : g.labels) {
      if (l == kIgnore) continue;
      if (l >= seen.size()) {
        throw Error(kModule, ErrorKind::kProbe,
                    "label " + std::to_string(l) + " outside the schedule");
      }
      ++seen[l];
    }
  }
  for (ClassId c : classes) {
    if (seen[c] == 0) {
      throw Error(kModule, ErrorKind::kProbe,
                  "class " + std::to_string(c) +
                      " is absent from the probe training data");
    }
  }

  SegModel model;
  model.params.backbone = backbone;
  model.backbone_frozen = true;
  model.current_step = step;
  ClassifierBlock block;
  block.step = 1;
  block.classes = classes;
  const auto e = backbone.w2.rows();
  block.weight.resize(static_cast<Eigen::Index>(classes.size()), e);
  RngStream init(probe_seed, StreamTag::kProbeInit);
  for (Eigen::Index r = 0; r < block.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < e; ++c) block.weight(r, c) = init.normal(0.0, 0.01);
  }
  block.bias = Eigen::VectorXd::Zero(block.weight.rows());
  model.params.classifiers.blocks.push_back(std::move(block));

  const Hyper h = probe_hyper(hyper);
  RngStream shuffle(probe_seed, StreamTag::kProbeShuffle);
  train_sgd(model, full_train, h, h.epochs_per_step, shuffle);

  ProbeResult result;
  result.step = step;
  result.probe = model.params.classifiers.blocks.front();
  std::uint64_t correct = 0, total = 0;
  for (const auto& g : full_train) {
    const auto pred = predict_from_embedding(model.classifiers(),
                                             embed(backbone, g));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (g.labels[i] == kIgnore) continue;
      ++total;
      correct += pred[i] == g.labels[i];
    }
  }
  result.train_pixel_accuracy =
      total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return result;
}

MetricsReport probing_eval(const BackboneParams& backbone,
                           const ClassifierBlock& probe,
                           std::span<const FeatureGrid> eval,
                           const ClassSchedule& schedule) {
  if (probe.classes != schedule.all_classes()) {
    throw Error(kModule, ErrorKind::kProbe,
                "probe does not cover every scheduled class");
  }
  const int k = schedule.total_fg_classes + 1;
  const ClassifierBank bank = single_block_bank(probe);
  ConfusionMatrix conf(k);
  for (const auto& g : eval) {
    const auto pred = predict_from_embedding(bank, embed(backbone, g));
    conf += accumulate_confusion(pred, g.labels, k);
  }
  return miou_groups(conf, schedule, schedule.num_steps());
}

}  // namespace csslab
