#ifndef CSSLAB_MODEL_H_
#define CSSLAB_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csslab/feature_grid.h"
#include "csslab/rng.h"

namespace csslab {

// Class id carried by a pre-allocated row that is not yet bound to a class
// (the oversized-classifier variant of future pre-allocation).
inline constexpr ClassId kUnassignedRow = 65534;

struct ModelDims {
  std::uint32_t feat_dim = 16;
  std::uint32_t hidden_dim = 64;
  std::uint32_t embed_dim = 32;
  // Append the 3x3 local mean of the input features before the backbone.
  bool local_context = false;

  std::uint32_t input_dim() const {
    return local_context ? 2 * feat_dim : feat_dim;
  }
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Per-pixel two-layer network: z = W2 relu(W1 x + b1) + b2.
struct BackboneParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // embed x hidden
  Eigen::VectorXd b2;
  bool local_context = false;

  ModelDims dims() const;
  bool operator==(const BackboneParams& other) const;
};

struct ClassifierBlock {
  int step = 0;  // 0 for the future block
  std::vector<ClassId> classes;  // ascending; one per weight row
  Eigen::MatrixXd weight;        // rows x embed
  Eigen::VectorXd bias;
  bool frozen = false;

  Eigen::Index rows() const { return weight.rows(); }
  bool operator==(const ClassifierBlock& other) const;
};

struct ClassifierBank {
  std::vector<ClassifierBlock> blocks;
  std::optional<ClassifierBlock> future;

  std::vector<ClassId> learned_classes() const;
  Eigen::Index learned_rows() const;
  bool contains(ClassId id) const;
  const ClassifierBlock* block_for_step(int step) const;

  bool operator==(const ClassifierBank& other) const = default;
};

struct ModelParams {
  BackboneParams backbone;
  ClassifierBank classifiers;

  bool operator==(const ModelParams& other) const = default;
};

enum class Strategy { kDft, kFixB, kFixBC, kFixBCP, kJoint };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct SegModel {
  ModelParams params;
  Strategy strategy = Strategy::kDft;
  int current_step = 0;
  bool backbone_frozen = false;

  const BackboneParams& backbone() const { return params.backbone; }
  const ClassifierBank& classifiers() const { return params.classifiers; }
};

enum class PolyTarget { kLearningRate, kWeightDecay };

struct Hyper {
  double lr0 = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double poly_power = 0.9;
  int epochs_per_step = 40;
  int batch_size = 8;
  PolyTarget poly_target = PolyTarget::kLearningRate;

  friend bool operator==(const Hyper&, const Hyper&) = default;
};

void validate(const Hyper& hyper);

// He-initialised W1, N(0, 1/hidden) W2, zero biases.
BackboneParams init_backbone(const ModelDims& dims, RngStream& rng);

// Flat views over every parameter array in declaration order: backbone w1,
// b1, w2, b2, then weight/bias of each classifier block, then the future
// block. Gradients and velocities share this layout.
struct ParamBlockView {
  std::string name;
  std::span<double> values;
};
struct ParamBlockConstView {
  std::string name;
  std::span<const double> values;
};
std::vector<ParamBlockView> param_blocks(ModelParams& params);
std::vector<ParamBlockConstView> param_blocks(const ModelParams& params);

// One flag per entry of param_blocks().
using TrainableMask = std::vector<bool>;

TrainableMask trainable_mask(const SegModel& model);
TrainableMask all_trainable(const ModelParams& params);
ModelParams zeros_like(const ModelParams& params);

// Backbone input for every pixel as columns (input_dim x H*W).
Eigen::MatrixXd backbone_input(const BackboneParams& backbone,
                               const FeatureGrid& grid);

// Embeddings as columns (embed_dim x H*W), pixel order row-major.
Eigen::MatrixXd embed(const BackboneParams& backbone, const FeatureGrid& grid);

// Class ids of the forward() logit rows: learned classes in id order, then
// future rows when a future block is present.
std::vector<ClassId> active_classes(const ClassifierBank& bank);

// Stacked classifier rows; `include_future` appends the future block.
Eigen::MatrixXd stacked_weights(const ClassifierBank& bank,
                                bool include_future);
Eigen::VectorXd stacked_bias(const ClassifierBank& bank, bool include_future);

// Logits (K x H*W) over active_classes().
Eigen::MatrixXd forward(const SegModel& model, const FeatureGrid& grid);

// Per-pixel argmax over the learned classes only (future rows never predict).
std::vector<ClassId> predict_learned(const SegModel& model,
                                     const FeatureGrid& grid);
std::vector<ClassId> predict_from_embedding(const ClassifierBank& bank,
                                            const Eigen::MatrixXd& z);

struct LossAndGrads {
  double loss = 0.0;
  std::size_t pixels = 0;
  ModelParams grads;
};

// Mean softmax cross-entropy over non-IGNORE pixels of the batch.
LossAndGrads loss_and_grads(const SegModel& model,
                            std::span<const FeatureGrid> batch,
                            const TrainableMask& mask);

// Same contract as loss_and_grads with the backbone output precomputed; only
// valid when the mask freezes the backbone.
struct EmbeddedGrid {
  const Eigen::MatrixXd* z = nullptr;  // embed_dim x H*W
  std::span<const ClassId> labels;
};
LossAndGrads head_loss_and_grads(const SegModel& model,
                                 std::span<const EmbeddedGrid> batch,
                                 const TrainableMask& mask);

double poly_lr(double lr0, long iter, long total_iters, double power);

struct SgdParams {
  double lr = 0.0;
  double momentum = 0.0;
  double weight_decay = 0.0;
};

// v <- momentum v + g + wd w; w <- w - lr v, trainable blocks only.
void sgd_step(ModelParams& params, const ModelParams& grads,
              ModelParams& velocity, const SgdParams& sgd,
              const TrainableMask& mask);

long count_trainable(const SegModel& model);

// Mini-batch SGD over `images` with a poly schedule spanning
// epochs * ceil(n / batch) iterations; velocity starts at zero. Uses the
// cached-embedding path when the backbone is frozen.
void train_sgd(SegModel& model, std::span<const FeatureGrid> images,
               const Hyper& hyper, int epochs, RngStream& shuffle_rng);

}  // namespace csslab

#endif  // CSSLAB_MODEL_H_
