#ifndef CSSLAB_METRICS_H_
#define CSSLAB_METRICS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csslab/feature_grid.h"
#include "csslab/model.h"
#include "csslab/schedule.h"

namespace csslab {

// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int num_classes)
      : size_(num_classes),
        counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {}

  int size() const { return size_; }
  std::uint64_t at(int truth, int pred) const {
    return counts_[static_cast<std::size_t>(truth) * size_ + pred];
  }
  std::uint64_t& at(int truth, int pred) {
    return counts_[static_cast<std::size_t>(truth) * size_ + pred];
  }
  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  int size_ = 0;
  std::vector<std::uint64_t> counts_;
};

// IGNORE labels are skipped; any other id >= num_classes is rejected.
ConfusionMatrix accumulate_confusion(std::span<const ClassId> pred,
                                     std::span<const ClassId> labels,
                                     int num_classes);

// Group means are in percent; an IoU or group with zero support is nullopt.
struct MetricsReport {
  int step = 0;
  std::vector<std::optional<double>> class_iou;  // indexed by class id
  std::optional<double> miou_init;
  std::optional<double> miou_incr;
  std::optional<double> miou_all;
};

// Groups: C^1 (background included), C^{2:seen_steps}, C^{1:seen_steps}.
MetricsReport miou_groups(const ConfusionMatrix& conf,
                          const ClassSchedule& schedule, int seen_steps);

std::optional<double> mean_defined(std::span<const std::optional<double>> iou,
                                   std::span<const ClassId> classes);

struct PrototypeSet {
  std::vector<ClassId> classes;
  Eigen::MatrixXd means;  // one row per class, embed_dim columns
  std::vector<std::uint64_t> counts;
};

PrototypeSet class_prototypes(const BackboneParams& backbone,
                              std::span<const FeatureGrid> images,
                              std::span<const ClassId> class_set);

struct CosMatrix {
  int measured_step = 0;
  int weight_step = 0;
  Eigen::MatrixXd values;  // prototypes x weight rows
};

// Cosine between each prototype (rows) and each weight row; biases play no
// part.
CosMatrix cos_matrix(const PrototypeSet& prototypes,
                     const Eigen::MatrixXd& weights);

enum class MdSource { kObserved, kProbing };

std::string_view to_string(MdSource source);

struct MdRecord {
  int t = 0;
  int k = 0;
  double value = 0.0;
  MdSource source = MdSource::kObserved;
};

// Mean absolute entrywise difference between two equally shaped matrices.
double moving_distance(const CosMatrix& reference, const CosMatrix& current);

// Which values the step-t weight rows take at measurement step t+k.
enum class MdWeights { kCurrent, kFrozenAtT };

struct MdInputs {
  const ClassSchedule* schedule = nullptr;
  // snapshots[t-1]: model state after step t.
  std::span<const SegModel> snapshots;
  // probes[t-1]: probe classifier trained on snapshot t (may be empty).
  std::span<const ClassifierBlock> probes;
  std::span<const FeatureGrid> prototype_images;
  MdWeights weights = MdWeights::kCurrent;
};

// For every t in 2..T and k in 1..T-t, one observed record and, when probes
// are supplied, one probing record.
std::vector<MdRecord> md_trajectory(const MdInputs& inputs);

}  // namespace csslab

#endif  // CSSLAB_METRICS_H_
