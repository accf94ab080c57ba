#ifndef CSSLAB_TASK_STREAM_H_
#define CSSLAB_TASK_STREAM_H_

#include <vector>

#include "csslab/feature_grid.h"
#include "csslab/schedule.h"

namespace csslab {

struct StepData {
  int step = 0;
  // Indices into the source training set, ascending.
  std::vector<std::size_t> source_indices;
  // Relabeled copies: labels outside C^t are 0 (IGNORE stays IGNORE).
  std::vector<FeatureGrid> images;
};

struct TaskStream {
  std::vector<StepData> steps;
  // Shared evaluation collection, labels untouched.
  std::vector<FeatureGrid> eval;
};

// Step t draws the training images that contain at least one pixel of a
// foreground class in C^t. Overlapped keeps all of them; disjoint also drops
// images with any pixel of a class in C^{t+1:T}. Labels outside C^t become
// background.
TaskStream make_task_stream(const Dataset& train, const Dataset& eval,
                            const ClassSchedule& schedule);

// The masking rule on its own: ids in `keep` are preserved, IGNORE is
// preserved, everything else maps to background.
FeatureGrid relabel_for_step(const FeatureGrid& grid,
                             const std::vector<ClassId>& keep);

}  // namespace csslab

#endif  // CSSLAB_TASK_STREAM_H_
