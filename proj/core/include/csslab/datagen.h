#ifndef CSSLAB_DATAGEN_H_
#define CSSLAB_DATAGEN_H_

#include <cstdint>
#include <vector>

#include "csslab/feature_grid.h"

namespace csslab {

// Parameters of the synthetic segmentation benchmark.
//
// Draw order (all streams are mt19937_64, see rng.h):
//   1. global stream (seed, kDataGlobal): N+2 class means on the unit sphere
//      (ids 0..N, then a second background mean), then per mixing layer the
//      d x d matrix row-major followed by the d offsets;
//   2. per image i (train images first, then eval), stream
//      (seed, kDataImage, i): object count, then per object the class (for
//      secondary objects), width, height, x0, y0; then the background
//      texture angle and phase; then d noise draws per pixel in row-major
//      pixel order.
struct SynthParams {
  std::uint32_t num_classes = 10;
  std::uint32_t feat_dim = 16;
  std::uint32_t height = 16;
  std::uint32_t width = 16;
  // Training images generated with each foreground class as the primary
  // (top-most) object; eval uses eval_images_per_class.
  std::uint32_t images_per_class = 8;
  std::uint32_t eval_images_per_class = 4;
  std::uint32_t objects_min = 1;
  std::uint32_t objects_max = 2;
  std::uint32_t object_min_side = 4;
  std::uint32_t object_max_side = 8;
  double noise_sigma = 0.2;
  std::uint32_t mixing_depth = 1;
  double mixing_gain = 3.0;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

void validate(const SynthParams& params);

// An axis-aligned object rectangle, half-open [x0, x0+w) x [y0, y0+h).
struct PlacedRect {
  ClassId class_id = 0;
  std::uint32_t x0 = 0;
  std::uint32_t y0 = 0;
  std::uint32_t w = 0;
  std::uint32_t h = 0;
};

struct GeneratedData {
  Dataset train;
  Dataset eval;
  // Rectangles per image in paint order (later ones overwrite earlier).
  std::vector<std::vector<PlacedRect>> train_rects;
  std::vector<std::vector<PlacedRect>> eval_rects;
};

GeneratedData generate_dataset(const SynthParams& params);

}  // namespace csslab

#endif  // CSSLAB_DATAGEN_H_
