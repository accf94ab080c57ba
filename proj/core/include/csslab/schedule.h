#ifndef CSSLAB_SCHEDULE_H_
#define CSSLAB_SCHEDULE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csslab/feature_grid.h"

namespace csslab {

enum class Scenario { kDisjoint, kOverlapped };

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view text);

// Ordered, pairwise-disjoint class sets C^1..C^T partitioning {0..N}.
// Background (id 0) always belongs to C^1.
struct ClassSchedule {
  int total_fg_classes = 0;
  Scenario scenario = Scenario::kOverlapped;
  std::vector<std::vector<ClassId>> steps;

  int num_steps() const { return static_cast<int>(steps.size()); }

  // 1-based step index, as in the CSS literature.
  const std::vector<ClassId>& classes(int step) const;

  // Union of C^from..C^to in ascending order; empty when from > to.
  std::vector<ClassId> classes_between(int from, int to) const;
  std::vector<ClassId> seen_classes(int step) const {
    return classes_between(1, step);
  }
  std::vector<ClassId> future_classes(int step) const {
    return classes_between(step + 1, num_steps());
  }
  std::vector<ClassId> all_classes() const {
    return classes_between(1, num_steps());
  }

  // Step that introduces `id`, or 0 if the class is not scheduled.
  int step_of(ClassId id) const;

  // The setting text this schedule was built from, e.g. "5-1".
  std::string setting;

  friend bool operator==(const ClassSchedule&, const ClassSchedule&) = default;
};

// Parses "X-Y" (X initial foreground classes, Y per increment).
ClassSchedule build_schedule(std::string_view setting, int total_fg_classes,
                             Scenario scenario);

// Explicit foreground step sizes, e.g. {15, 1, 1, 1, 1, 1}.
ClassSchedule build_schedule(std::span<const int> step_sizes,
                             int total_fg_classes, Scenario scenario);

// The single-step schedule used for joint training.
ClassSchedule joint_schedule(int total_fg_classes);

}  // namespace csslab

#endif  // CSSLAB_SCHEDULE_H_
