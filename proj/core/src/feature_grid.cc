#include "csslab/feature_grid.h"

#include <cmath>
#include <string>

#include "csslab/errors.h"

namespace csslab {

void validate_dataset(const Dataset& dataset) {
  auto fail = [](std::size_t i, const std::string& what) {
    throw Error("datagen", ErrorKind::kValidation,
                "image " + std::to_string(i) + ": " + what);
  };
  for (std::size_t i = 0; i < dataset.images.size(); ++i) {
    const FeatureGrid& g = dataset.images[i];
    if (g.height != dataset.height || g.width != dataset.width ||
        g.feat_dim != dataset.feat_dim) {
      fail(i, "extents differ from the dataset header");
    }
    if (g.labels.size() != g.pixels() ||
        g.features.size() != g.pixels() * g.feat_dim) {
      fail(i, "feature/label extents disagree");
    }
    for (float v : g.features) {
      if (!std::isfinite(v)) fail(i, "non-finite feature value");
    }
    for (ClassId label : g.labels) {
      if (label != kIgnore && label > dataset.num_classes) {
        fail(i, "label " + std::to_string(label) + " exceeds N=" +
                    std::to_string(dataset.num_classes));
      }
    }
  }
}

std::vector<std::uint64_t> class_histogram(const Dataset& dataset) {
  std::vector<std::uint64_t> counts(dataset.num_classes + 1, 0);
  for (const auto& g : dataset.images) {
    for (ClassId label : g.labels) {
      if (label != kIgnore && label < counts.size()) ++counts[label];
    }
  }
  return counts;
}

}  // namespace csslab
