#ifndef CSSLAB_PROBING_H_
#define CSSLAB_PROBING_H_

#include <cstdint>
#include <span>

#include "csslab/feature_grid.h"
#include "csslab/metrics.h"
#include "csslab/model.h"
#include "csslab/schedule.h"

namespace csslab {

struct ProbeResult {
  int step = 0;
  ClassifierBlock probe;  // covers C^{1:T}
  MetricsReport report;
  double train_pixel_accuracy = 0.0;
};

// Probe budget: the main schedule with epochs_per_step doubled.
Hyper probe_hyper(const Hyper& hyper);

// Fits a freshly initialised all-class linear head on embeddings of the
// frozen `backbone`. Randomness comes only from `probe_seed`, so the probe is
// independent of the CSS trajectory.
ProbeResult train_probe(const BackboneParams& backbone,
                        std::span<const FeatureGrid> full_train,
                        const ClassSchedule& schedule, const Hyper& hyper,
                        std::uint64_t probe_seed, int step = 0);

MetricsReport probing_eval(const BackboneParams& backbone,
                           const ClassifierBlock& probe,
                           std::span<const FeatureGrid> eval,
                           const ClassSchedule& schedule);

}  // namespace csslab

#endif  // CSSLAB_PROBING_H_
