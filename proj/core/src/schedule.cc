#include "csslab/schedule.h"

#include <algorithm>
#include <charconv>
#include <string>

#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "datagen";

int parse_positive(std::string_view text, std::string_view setting) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(kModule, ErrorKind::kValidation,
                "malformed setting '" + std::string(setting) +
                    "' (expected X-Y)");
  }
  return value;
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  return scenario == Scenario::kDisjoint ? "disjoint" : "overlapped";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "disjoint") return Scenario::kDisjoint;
  if (text == "overlapped" || text == "overlap") return Scenario::kOverlapped;
  throw Error(kModule, ErrorKind::kValidation,
              "unknown scenario '" + std::string(text) + "'");
}

const std::vector<ClassId>& ClassSchedule::classes(int step) const {
  if (step < 1 || step > num_steps()) {
    throw Error(kModule, ErrorKind::kRange,
                "step " + std::to_string(step) + " outside 1.." +
                    std::to_string(num_steps()));
  }
  return steps[static_cast<std::size_t>(step - 1)];
}

std::vector<ClassId> ClassSchedule::classes_between(int from, int to) const {
  std::vector<ClassId> out;
  for (int t = std::max(from, 1); t <= std::min(to, num_steps()); ++t) {
    const auto& c = steps[static_cast<std::size_t>(t - 1)];
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ClassSchedule::step_of(ClassId id) const {
  for (int t = 1; t <= num_steps(); ++t) {
    const auto& c = steps[static_cast<std::size_t>(t - 1)];
    if (std::binary_search(c.begin(), c.end(), id)) return t;
  }
  return 0;
}

ClassSchedule build_schedule(std::string_view setting, int total_fg_classes,
                             Scenario scenario) {
  const auto dash = setting.find('-');
  if (dash == std::string_view::npos) {
    throw Error(kModule, ErrorKind::kValidation,
                "malformed setting '" + std::string(setting) +
                    "' (expected X-Y)");
  }
  const int x = parse_positive(setting.substr(0, dash), setting);
  const int y = parse_positive(setting.substr(dash + 1), setting);
  if (x <= 0 || y <= 0) {
    throw Error(kModule, ErrorKind::kValidation,
                "X and Y must be >= 1 in setting '" + std::string(setting) +
                    "'");
  }
  const int rest = total_fg_classes - x;
  if (rest < y || rest % y != 0) {
    throw Error(kModule, ErrorKind::kSchedule,
                "setting '" + std::string(setting) + "' does not cover " +
                    std::to_string(total_fg_classes) +
                    " classes: X + kY must equal the total for some k >= 1");
  }
  std::vector<int> sizes{x};
  sizes.insert(sizes.end(), static_cast<std::size_t>(rest / y), y);
  ClassSchedule schedule = build_schedule(sizes, total_fg_classes, scenario);
  schedule.setting = std::string(setting);
  return schedule;
}

ClassSchedule build_schedule(std::span<const int> step_sizes,
                             int total_fg_classes, Scenario scenario) {
  if (step_sizes.empty()) {
    throw Error(kModule, ErrorKind::kValidation, "empty step-size list");
  }
  if (total_fg_classes < 1 || total_fg_classes >= 65534) {
    throw Error(kModule, ErrorKind::kValidation,
                "total foreground classes must be in 1..65533");
  }
  int sum = 0;
  for (int s : step_sizes) {
    if (s <= 0) {
      throw Error(kModule, ErrorKind::kValidation,
                  "step sizes must be >= 1");
    }
    sum += s;
  }
  if (sum != total_fg_classes) {
    throw Error(kModule, ErrorKind::kSchedule,
                "step sizes sum to " + std::to_string(sum) + ", expected " +
                    std::to_string(total_fg_classes));
  }
  ClassSchedule schedule;
  schedule.total_fg_classes = total_fg_classes;
  schedule.scenario = scenario;
  ClassId next = 1;
  for (std::size_t i = 0; i < step_sizes.size(); ++i) {
    std::vector<ClassId> block;
    if (i == 0) block.push_back(kBackground);
    for (int j = 0; j < step_sizes[i]; ++j) block.push_back(next++);
    schedule.steps.push_back(std::move(block));
  }
  for (std::size_t i = 0; i < step_sizes.size(); ++i) {
    if (i) schedule.setting += ',';
    schedule.setting += std::to_string(step_sizes[i]);
  }
  return schedule;
}

ClassSchedule joint_schedule(int total_fg_classes) {
  const int sizes[] = {total_fg_classes};
  ClassSchedule schedule =
      build_schedule(sizes, total_fg_classes, Scenario::kOverlapped);
  schedule.setting = std::to_string(total_fg_classes) + "-0";
  return schedule;
}

}  // namespace csslab
