#include "csslab/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "metrics";

Eigen::MatrixXd rows_for_classes(const ClassifierBlock& block,
                                 const std::vector<ClassId>& classes) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(classes.size()),
                      block.weight.cols());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto it = std::find(block.classes.begin(), block.classes.end(), classes[i]);
    if (it == block.classes.end()) {
      throw Error(kModule, ErrorKind::kArtifact,
                  "classifier has no row for class " +
                      std::to_string(classes[i]));
    }
    out.row(static_cast<Eigen::Index>(i)) =
        block.weight.row(it - block.classes.begin());
  }
  return out;
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.size_ != size_) {
    throw Error(kModule, ErrorKind::kValidation,
                "confusion matrices of different sizes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix accumulate_confusion(std::span<const ClassId> pred,
                                     std::span<const ClassId> labels,
                                     int num_classes) {
  if (pred.size() != labels.size()) {
    throw Error(kModule, ErrorKind::kValidation,
                "prediction and label grids differ in size");
  }
  if (num_classes < 1) {
    throw Error(kModule, ErrorKind::kValidation, "need at least one class");
  }
  ConfusionMatrix conf(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kIgnore) continue;
    if (labels[i] >= num_classes || pred[i] >= num_classes) {
      throw Error(kModule, ErrorKind::kValidation,
                  "pixel " + std::to_string(i) + ": label " +
                      std::to_string(labels[i]) + " / prediction " +
                      std::to_string(pred[i]) + " outside 0.." +
                      std::to_string(num_classes - 1));
    }
    ++conf.at(labels[i], pred[i]);
  }
  return conf;
}

std::optional<double> mean_defined(std::span<const std::optional<double>> iou,
                                   std::span<const ClassId> classes) {
  double sum = 0.0;
  int n = 0;
  for (ClassId c : classes) {
    if (c < iou.size() && iou[c]) {
      sum += *iou[c];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return 100.0 * sum / n;
}

MetricsReport miou_groups(const ConfusionMatrix& conf,
                          const ClassSchedule& schedule, int seen_steps) {
  const int k = conf.size();
  const auto all = schedule.seen_classes(seen_steps);
  if (!all.empty() && all.back() >= k) {
    throw Error(kModule, ErrorKind::kValidation,
                "confusion matrix covers " + std::to_string(k) +
                    " classes but class " + std::to_string(all.back()) +
                    " has been seen");
  }
  MetricsReport report;
  report.step = seen_steps;
  report.class_iou.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    std::uint64_t row = 0, col = 0;
    for (int j = 0; j < k; ++j) {
      row += conf.at(c, j);
      col += conf.at(j, c);
    }
    const std::uint64_t tp = conf.at(c, c);
    const std::uint64_t denom = row + col - tp;
    if (denom > 0) {
      report.class_iou[static_cast<std::size_t>(c)] =
          static_cast<double>(tp) / static_cast<double>(denom);
    }
  }
  const auto init = schedule.classes(1);
  const auto incr = schedule.classes_between(2, seen_steps);
  report.miou_init = mean_defined(report.class_iou, init);
  report.miou_incr = mean_defined(report.class_iou, incr);
  report.miou_all = mean_defined(report.class_iou, all);
  return report;
}

PrototypeSet class_prototypes(const BackboneParams& backbone,
                              std::span<const FeatureGrid> images,
                              std::span<const ClassId> class_set) {
  PrototypeSet set;
  set.classes.assign(class_set.begin(), class_set.end());
  const auto n = static_cast<Eigen::Index>(class_set.size());
  const auto e = backbone.w2.rows();
  set.means = Eigen::MatrixXd::Zero(n, e);
  set.counts.assign(class_set.size(), 0);
  std::vector<int> row(65536, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    row[class_set[static_cast<std::size_t>(i)]] = static_cast<int>(i);
  }
  for (const auto& g : images) {
    const Eigen::MatrixXd z = embed(backbone, g);
    for (Eigen::Index p = 0; p < z.cols(); ++p) {
      const int r = row[g.labels[static_cast<std::size_t>(p)]];
      if (r < 0) continue;
      set.means.row(r) += z.col(p).transpose();
      ++set.counts[static_cast<std::size_t>(r)];
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto count = set.counts[static_cast<std::size_t>(i)];
    if (count == 0) {
      throw Error(kModule, ErrorKind::kPrototype,
                  "class " + std::to_string(class_set[static_cast<std::size_t>(i)]) +
                      " has no pixels");
    }
    set.means.row(i) /= static_cast<double>(count);
  }
  return set;
}

CosMatrix cos_matrix(const PrototypeSet& prototypes,
                     const Eigen::MatrixXd& weights) {
  const Eigen::MatrixXd& p = prototypes.means;
  if (p.cols() != weights.cols()) {
    throw Error(kModule, ErrorKind::kValidation,
                "prototype dim " + std::to_string(p.cols()) +
                    " != weight dim " + std::to_string(weights.cols()));
  }
  const Eigen::VectorXd pn = p.rowwise().norm();
  const Eigen::VectorXd wn = weights.rowwise().norm();
  for (Eigen::Index m = 0; m < pn.size(); ++m) {
    if (pn(m) == 0.0) {
      throw Error(kModule, ErrorKind::kCosine,
                  "zero-norm prototype row " + std::to_string(m) +
                      " (class " +
                      std::to_string(prototypes.classes[static_cast<std::size_t>(m)]) +
                      ")");
    }
  }
  for (Eigen::Index n = 0; n < wn.size(); ++n) {
    if (wn(n) == 0.0) {
      throw Error(kModule, ErrorKind::kCosine,
                  "zero-norm weight row " + std::to_string(n));
    }
  }
  CosMatrix out;
  out.values.resize(p.rows(), weights.rows());
  for (Eigen::Index m = 0; m < p.rows(); ++m) {
    for (Eigen::Index n = 0; n < weights.rows(); ++n) {
      out.values(m, n) = p.row(m).dot(weights.row(n)) / (pn(m) * wn(n));
    }
  }
  return out;
}

std::string_view to_string(MdSource source) {
  return source == MdSource::kObserved ? "observed" : "probing";
}

double moving_distance(const CosMatrix& reference, const CosMatrix& current) {
  const auto& a = reference.values;
  const auto& b = current.values;
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(kModule, ErrorKind::kValidation,
                "cosine matrices differ in shape (" + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()) + " vs " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                    ")");
  }
  if (a.size() == 0) {
    throw Error(kModule, ErrorKind::kValidation, "empty cosine matrix");
  }
  return (a - b).cwiseAbs().sum() / static_cast<double>(a.size());
}

std::vector<MdRecord> md_trajectory(const MdInputs& in) {
  if (in.schedule == nullptr) {
    throw Error(kModule, ErrorKind::kArtifact, "no schedule");
  }
  const ClassSchedule& schedule = *in.schedule;
  const int steps = schedule.num_steps();
  if (static_cast<int>(in.snapshots.size()) != steps) {
    throw Error(kModule, ErrorKind::kArtifact,
                "missing snapshot: have " +
                    std::to_string(in.snapshots.size()) + " of " +
                    std::to_string(steps));
  }
  const bool with_probes = !in.probes.empty();
  if (with_probes && static_cast<int>(in.probes.size()) != steps) {
    throw Error(kModule, ErrorKind::kArtifact,
                "missing probe snapshot: have " +
                    std::to_string(in.probes.size()) + " of " +
                    std::to_string(steps));
  }

  const std::vector<ClassId> all = schedule.all_classes();
  std::vector<std::optional<PrototypeSet>> protos(static_cast<std::size_t>(steps));
  auto prototypes_at = [&](int step) -> const PrototypeSet& {
    auto& slot = protos[static_cast<std::size_t>(step - 1)];
    if (!slot) {
      slot = class_prototypes(in.snapshots[static_cast<std::size_t>(step - 1)]
                                  .backbone(),
                              in.prototype_images, all);
    }
    return *slot;
  };
  auto observed_rows = [&](int at, int group) -> const Eigen::MatrixXd& {
    const ClassifierBlock* b =
        in.snapshots[static_cast<std::size_t>(at - 1)].classifiers()
            .block_for_step(group);
    if (b == nullptr) {
      throw Error(kModule, ErrorKind::kArtifact,
                  "snapshot " + std::to_string(at) + " has no block for step " +
                      std::to_string(group));
    }
    return b->weight;
  };

  std::vector<MdRecord> out;
  for (int t = 2; t <= steps; ++t) {
    const std::vector<ClassId>& group = schedule.classes(t);
    CosMatrix ref = cos_matrix(prototypes_at(t), observed_rows(t, t));
    ref.measured_step = ref.weight_step = t;
    std::optional<CosMatrix> probe_ref;
    Eigen::MatrixXd probe_rows_t;
    if (with_probes) {
      probe_rows_t = rows_for_classes(in.probes[static_cast<std::size_t>(t - 1)],
                                      group);
      probe_ref = cos_matrix(prototypes_at(t), probe_rows_t);
    }
    for (int k = 1; k <= steps - t; ++k) {
      const Eigen::MatrixXd& w = in.weights == MdWeights::kCurrent
                                     ? observed_rows(t + k, t)
                                     : observed_rows(t, t);
      CosMatrix now = cos_matrix(prototypes_at(t + k), w);
      now.measured_step = t + k;
      now.weight_step = t;
      out.push_back({t, k, moving_distance(ref, now), MdSource::kObserved});
      if (with_probes) {
        const Eigen::MatrixXd rows =
            in.weights == MdWeights::kCurrent
                ? rows_for_classes(
                      in.probes[static_cast<std::size_t>(t + k - 1)], group)
                : probe_rows_t;
        const CosMatrix probe_now = cos_matrix(prototypes_at(t + k), rows);
        out.push_back(
            {t, k, moving_distance(*probe_ref, probe_now), MdSource::kProbing});
      }
    }
  }
  return out;
}

}  // namespace csslab
