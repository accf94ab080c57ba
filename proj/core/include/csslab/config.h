#ifndef CSSLAB_CONFIG_H_
#define CSSLAB_CONFIG_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csslab/trainer.h"

namespace csslab {

// Line-based "key = value" text with [experiment], [model], [optim] and
// [data] sections; '#' and ';' start comments. The full key list lives in
// docs/config.md. Errors carry the 1-based line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

// Canonical (section.key, value) pairs; parse_config(format_config(c))
// reproduces c.
ConfigEntries config_entries(const ExperimentConfig& config);
std::string format_config(const ExperimentConfig& config);

}  // namespace csslab

#endif  // CSSLAB_CONFIG_H_
