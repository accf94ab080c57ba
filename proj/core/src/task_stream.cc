#include "csslab/task_stream.h"

#include <algorithm>
#include <string>

#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "datagen";

// Lookup table over the full label range.
std::vector<char> membership(const std::vector<ClassId>& ids) {
  std::vector<char> table(65536, 0);
  for (ClassId id : ids) table[id] = 1;
  return table;
}

bool contains_any(const FeatureGrid& g, const std::vector<char>& table) {
  return std::any_of(g.labels.begin(), g.labels.end(),
                     [&](ClassId l) { return table[l] != 0; });
}

}  // namespace

FeatureGrid relabel_for_step(const FeatureGrid& grid,
                             const std::vector<ClassId>& keep) {
  const auto table = membership(keep);
  FeatureGrid out = grid;
  for (auto& label : out.labels) {
    if (label != kIgnore && !table[label]) label = kBackground;
  }
  return out;
}

TaskStream make_task_stream(const Dataset& train, const Dataset& eval,
                            const ClassSchedule& schedule) {
  if (static_cast<int>(train.num_classes) != schedule.total_fg_classes ||
      static_cast<int>(eval.num_classes) != schedule.total_fg_classes) {
    throw Error(kModule, ErrorKind::kStream,
                "dataset has " + std::to_string(train.num_classes) +
                    " classes, schedule expects " +
                    std::to_string(schedule.total_fg_classes));
  }
  validate_dataset(train);
  validate_dataset(eval);

  TaskStream stream;
  stream.eval = eval.images;
  for (int t = 1; t <= schedule.num_steps(); ++t) {
    const auto& current = schedule.classes(t);
    std::vector<ClassId> current_fg;
    std::copy_if(current.begin(), current.end(),
                 std::back_inserter(current_fg),
                 [](ClassId c) { return c != kBackground; });
    const auto current_table = membership(current_fg);
    // Future foreground classes only; background never triggers the filter.
    const auto future_table = membership(schedule.future_classes(t));

    StepData step;
    step.step = t;
    for (std::size_t i = 0; i < train.images.size(); ++i) {
      const FeatureGrid& g = train.images[i];
      if (!contains_any(g, current_table)) continue;
      if (schedule.scenario == Scenario::kDisjoint &&
          contains_any(g, future_table)) {
        continue;
      }
      step.source_indices.push_back(i);
      step.images.push_back(relabel_for_step(g, current));
    }
    if (step.images.empty()) {
      throw Error(kModule, ErrorKind::kStream,
                  "step " + std::to_string(t) +
                      " has no training images under the " +
                      std::string(to_string(schedule.scenario)) +
                      " scenario");
    }
    stream.steps.push_back(std::move(step));
  }
  return stream;
}

}  // namespace csslab
