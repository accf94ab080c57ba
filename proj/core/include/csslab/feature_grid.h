#ifndef CSSLAB_FEATURE_GRID_H_
#define CSSLAB_FEATURE_GRID_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace csslab {

using ClassId = std::uint16_t;

inline constexpr ClassId kBackground = 0;
inline constexpr ClassId kIgnore = 65535;

// One "image": H x W pixels, each with a d-dimensional feature vector and a
// class label. Features are row-major with the d values of a pixel contiguous.
struct FeatureGrid {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t feat_dim = 0;
  std::vector<float> features;
  std::vector<ClassId> labels;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  std::span<const float> pixel(std::size_t index) const {
    return {features.data() + index * feat_dim, feat_dim};
  }

  friend bool operator==(const FeatureGrid&, const FeatureGrid&) = default;
};

// A collection of same-shaped grids over N foreground classes (ids 1..N) plus
// background 0.
struct Dataset {
  std::uint32_t num_classes = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t feat_dim = 0;
  std::vector<FeatureGrid> images;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks the FeatureGrid invariants against a dataset's class count; throws
// a validation error naming the image on failure.
void validate_dataset(const Dataset& dataset);

// Pixel count per class id 0..N over all non-IGNORE pixels.
std::vector<std::uint64_t> class_histogram(const Dataset& dataset);

}  // namespace csslab

#endif  // CSSLAB_FEATURE_GRID_H_
