#ifndef CSSLAB_TESTS_ORACLES_H_
#define CSSLAB_TESTS_ORACLES_H_

// Brute-force re-implementations used as test oracles. Nothing here calls the
// library's numeric code; only plain data structures are shared.

#include <cstdint>
#include <span>
#include <vector>

#include "csslab/feature_grid.h"
#include "csslab/model.h"
#include "csslab/rng.h"

namespace csslab::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

// Per pixel, e values.
Mat embed(const BackboneParams& b, const FeatureGrid& grid);

// Classifier rows in logit order: blocks in order, then the future block.
struct Rows {
  std::vector<ClassId> ids;
  Mat w;
  Vec b;
};
Rows rows(const ClassifierBank& bank, bool include_future);

// Per pixel, K logits.
Mat logits(const SegModel& model, const FeatureGrid& grid);

// Mean softmax cross-entropy over non-IGNORE pixels, in log-sum-exp form.
double loss(const SegModel& model, std::span<const FeatureGrid> batch);

// K x K counts, rows truth.
std::vector<std::vector<std::uint64_t>> confusion(
    std::span<const ClassId> pred, std::span<const ClassId> labels, int k);

// IoU per class, negative when undefined.
Vec iou(const std::vector<std::vector<std::uint64_t>>& conf);

// Mean embedding per class in `classes`.
Mat prototypes(const BackboneParams& b, std::span<const FeatureGrid> images,
               std::span<const ClassId> classes);

Mat cosines(const Mat& protos, const Mat& weights);

double moving_distance(const Mat& ref, const Mat& now);

// Random grid with labels drawn from `classes` (and a few IGNORE pixels when
// `with_ignore`).
FeatureGrid random_grid(RngStream& rng, std::uint32_t h, std::uint32_t w,
                        std::uint32_t d, std::span<const ClassId> classes,
                        bool with_ignore = false);

// Random model with one classifier block per entry of `blocks`.
SegModel random_model(RngStream& rng, const ModelDims& dims,
                      const std::vector<std::vector<ClassId>>& blocks,
                      double scale = 0.5);

}  // namespace csslab::oracle

#endif  // CSSLAB_TESTS_ORACLES_H_
