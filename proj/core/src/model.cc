#include "csslab/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "model";

bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

bool same(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::equal(a.data(), a.data() + a.size(), b.data());
}

std::span<double> span_of(Eigen::MatrixXd& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> span_of(Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::string block_name(const ClassifierBlock& b) {
  return b.step == 0 ? std::string("future")
                     : "block" + std::to_string(b.step);
}

// Row of each active class in the stacked classifier, -1 when inactive.
std::vector<int> row_lookup(const ClassifierBank& bank) {
  std::vector<int> rows(65536, -1);
  int r = 0;
  for (ClassId id : active_classes(bank)) {
    if (id != kUnassignedRow) rows[id] = r;
    ++r;
  }
  return rows;
}

std::size_t count_valid(std::span<const ClassId> labels,
                        const std::vector<int>& rows) {
  std::size_t n = 0;
  for (ClassId l : labels) {
    if (l == kIgnore) continue;
    if (rows[l] < 0) {
      throw Error(kModule, ErrorKind::kValidation,
                  "label " + std::to_string(l) + " is not an active class");
    }
    ++n;
  }
  return n;
}

// Softmax cross-entropy for one image given its logits. Writes
// d(loss)/d(logits) scaled by inv_total into `dlogits` and returns the
// unscaled loss sum.
double softmax_xent(const Eigen::MatrixXd& logits,
                    std::span<const ClassId> labels,
                    const std::vector<int>& rows, double inv_total,
                    Eigen::MatrixXd& dlogits) {
  dlogits.resize(logits.rows(), logits.cols());
  double loss = 0.0;
  for (Eigen::Index p = 0; p < logits.cols(); ++p) {
    const ClassId label = labels[static_cast<std::size_t>(p)];
    if (label == kIgnore) {
      dlogits.col(p).setZero();
      continue;
    }
    const double peak = logits.col(p).maxCoeff();
    auto e = (logits.col(p).array() - peak).exp();
    const double sum = e.sum();
    const int r = rows[label];
    loss += std::log(sum) + peak - logits(r, p);
    dlogits.col(p) = (e / sum).matrix() * inv_total;
    dlogits(r, p) -= inv_total;
  }
  return loss;
}

struct HeadGrads {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

void scatter_head(const ClassifierBank& bank, const HeadGrads& head,
                  const TrainableMask& mask, ModelParams& grads) {
  auto& out = grads.classifiers;
  Eigen::Index row = 0;
  std::size_t m = 4;
  auto take = [&](ClassifierBlock& dst) {
    const Eigen::Index n = dst.rows();
    if (mask[m]) dst.weight = head.weight.middleRows(row, n);
    if (mask[m + 1]) dst.bias = head.bias.segment(row, n);
    row += n;
    m += 2;
  };
  for (auto& b : out.blocks) take(b);
  if (out.future) take(*out.future);
  (void)bank;
}

bool backbone_trainable(const TrainableMask& mask) {
  return mask[0] || mask[1] || mask[2] || mask[3];
}

void check_mask(const ModelParams& params, const TrainableMask& mask) {
  const std::size_t expected =
      4 + 2 * params.classifiers.blocks.size() +
      (params.classifiers.future ? 2 : 0);
  if (mask.size() != expected) {
    throw Error(kModule, ErrorKind::kShape,
                "trainable mask has " + std::to_string(mask.size()) +
                    " entries, model has " + std::to_string(expected) +
                    " parameter blocks");
  }
}

void check_grid(const BackboneParams& bb, const FeatureGrid& g) {
  if (g.feat_dim != bb.dims().feat_dim) {
    throw Error(kModule, ErrorKind::kShape,
                "grid feature dim " + std::to_string(g.feat_dim) +
                    " != backbone input dim " +
                    std::to_string(bb.dims().feat_dim));
  }
  if (g.features.size() != g.pixels() * g.feat_dim ||
      g.labels.size() != g.pixels()) {
    throw Error(kModule, ErrorKind::kShape, "grid extents disagree");
  }
}

LossAndGrads loss_and_grads_impl(const SegModel& model,
                                 std::span<const FeatureGrid* const> batch,
                                 std::span<const EmbeddedGrid> embedded,
                                 const TrainableMask& mask) {
  const ModelParams& params = model.params;
  check_mask(params, mask);
  const auto& bank = params.classifiers;
  if (bank.blocks.empty() && !bank.future) {
    throw Error(kModule, ErrorKind::kState, "empty classifier bank");
  }
  const bool with_backbone = embedded.empty();
  if (!with_backbone && backbone_trainable(mask)) {
    throw Error(kModule, ErrorKind::kState,
                "cached embeddings require a frozen backbone");
  }
  const std::vector<int> rows = row_lookup(bank);
  std::size_t total = 0;
  const std::size_t n_images = with_backbone ? batch.size() : embedded.size();
  for (std::size_t i = 0; i < n_images; ++i) {
    total += count_valid(
        with_backbone ? std::span<const ClassId>(batch[i]->labels)
                      : embedded[i].labels,
        rows);
  }
  if (total == 0) {
    throw Error(kModule, ErrorKind::kLoss,
                "batch has no non-IGNORE pixels");
  }
  const double inv_total = 1.0 / static_cast<double>(total);

  const Eigen::MatrixXd w = stacked_weights(bank, true);
  const Eigen::VectorXd b = stacked_bias(bank, true);
  const BackboneParams& bb = params.backbone;
  const bool backprop = with_backbone && backbone_trainable(mask);

  LossAndGrads out;
  out.pixels = total;
  out.grads = zeros_like(params);
  HeadGrads head{Eigen::MatrixXd::Zero(w.rows(), w.cols()),
                 Eigen::VectorXd::Zero(w.rows())};
  Eigen::MatrixXd gw1, gw2;
  Eigen::VectorXd gb1, gb2;
  if (backprop) {
    gw1 = Eigen::MatrixXd::Zero(bb.w1.rows(), bb.w1.cols());
    gb1 = Eigen::VectorXd::Zero(bb.b1.size());
    gw2 = Eigen::MatrixXd::Zero(bb.w2.rows(), bb.w2.cols());
    gb2 = Eigen::VectorXd::Zero(bb.b2.size());
  }

  double loss = 0.0;
  Eigen::MatrixXd dlogits;
  for (std::size_t i = 0; i < n_images; ++i) {
    Eigen::MatrixXd x, pre, h, z_local;
    const Eigen::MatrixXd* z = nullptr;
    std::span<const ClassId> labels;
    if (with_backbone) {
      check_grid(bb, *batch[i]);
      x = backbone_input(bb, *batch[i]);
      pre = (bb.w1 * x).colwise() + bb.b1;
      h = pre.cwiseMax(0.0);
      z_local = (bb.w2 * h).colwise() + bb.b2;
      z = &z_local;
      labels = batch[i]->labels;
    } else {
      z = embedded[i].z;
      labels = embedded[i].labels;
    }
    const Eigen::MatrixXd logits = (w * *z).colwise() + b;
    loss += softmax_xent(logits, labels, rows, inv_total, dlogits);
    head.weight.noalias() += dlogits * z->transpose();
    head.bias += dlogits.rowwise().sum();
    if (backprop) {
      const Eigen::MatrixXd dz = w.transpose() * dlogits;
      gw2.noalias() += dz * h.transpose();
      gb2 += dz.rowwise().sum();
      const Eigen::MatrixXd dh =
          (bb.w2.transpose() * dz).cwiseProduct(
              (pre.array() > 0.0).cast<double>().matrix());
      gw1.noalias() += dh * x.transpose();
      gb1 += dh.rowwise().sum();
    }
  }
  out.loss = loss * inv_total;
  if (backprop) {
    auto& g = out.grads.backbone;
    if (mask[0]) g.w1 = gw1;
    if (mask[1]) g.b1 = gb1;
    if (mask[2]) g.w2 = gw2;
    if (mask[3]) g.b2 = gb2;
  }
  scatter_head(bank, head, mask, out.grads);
  return out;
}

}  // namespace

ModelDims BackboneParams::dims() const {
  ModelDims d;
  d.local_context = local_context;
  const auto in = static_cast<std::uint32_t>(w1.cols());
  d.feat_dim = local_context ? in / 2 : in;
  d.hidden_dim = static_cast<std::uint32_t>(w1.rows());
  d.embed_dim = static_cast<std::uint32_t>(w2.rows());
  return d;
}

bool BackboneParams::operator==(const BackboneParams& o) const {
  return local_context == o.local_context && same(w1, o.w1) &&
         same(b1, o.b1) && same(w2, o.w2) && same(b2, o.b2);
}

bool ClassifierBlock::operator==(const ClassifierBlock& o) const {
  return step == o.step && classes == o.classes && frozen == o.frozen &&
         same(weight, o.weight) && same(bias, o.bias);
}

std::vector<ClassId> ClassifierBank::learned_classes() const {
  std::vector<ClassId> out;
  for (const auto& b : blocks) {
    out.insert(out.end(), b.classes.begin(), b.classes.end());
  }
  return out;
}

Eigen::Index ClassifierBank::learned_rows() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  return n;
}

bool ClassifierBank::contains(ClassId id) const {
  auto has = [id](const ClassifierBlock& b) {
    return std::find(b.classes.begin(), b.classes.end(), id) !=
           b.classes.end();
  };
  return std::any_of(blocks.begin(), blocks.end(), has) ||
         (future && id != kUnassignedRow && has(*future));
}

const ClassifierBlock* ClassifierBank::block_for_step(int step) const {
  for (const auto& b : blocks) {
    if (b.step == step) return &b;
  }
  return nullptr;
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kDft: return "dft";
    case Strategy::kFixB: return "fixb";
    case Strategy::kFixBC: return "fixbc";
    case Strategy::kFixBCP: return "fixbc_p";
    case Strategy::kJoint: return "joint";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "dft") return Strategy::kDft;
  if (text == "fixb") return Strategy::kFixB;
  if (text == "fixbc") return Strategy::kFixBC;
  if (text == "fixbc_p" || text == "fixbc+p") return Strategy::kFixBCP;
  if (text == "joint") return Strategy::kJoint;
  throw Error("trainer", ErrorKind::kConfig,
              "unknown strategy '" + std::string(text) + "'");
}

void validate(const Hyper& h) {
  auto fail = [](const std::string& what) {
    throw Error(kModule, ErrorKind::kValidation, what);
  };
  if (!(h.lr0 >= 0.0) || !std::isfinite(h.lr0)) fail("lr0 must be >= 0");
  if (!(h.momentum >= 0.0 && h.momentum < 1.0)) {
    fail("momentum must be in [0, 1)");
  }
  if (!(h.weight_decay >= 0.0) || !std::isfinite(h.weight_decay)) {
    fail("weight_decay must be >= 0");
  }
  if (!(h.poly_power > 0.0) || !std::isfinite(h.poly_power)) {
    fail("poly_power must be > 0");
  }
  if (h.epochs_per_step < 1) fail("epochs_per_step must be >= 1");
  if (h.batch_size < 1) fail("batch_size must be >= 1");
}

BackboneParams init_backbone(const ModelDims& dims, RngStream& rng) {
  if (dims.feat_dim < 1 || dims.hidden_dim < 1 || dims.embed_dim < 1) {
    throw Error(kModule, ErrorKind::kValidation,
                "model dimensions must be >= 1");
  }
  BackboneParams bb;
  bb.local_context = dims.local_context;
  const double s1 = std::sqrt(2.0 / dims.input_dim());
  const double s2 = std::sqrt(1.0 / dims.hidden_dim);
  bb.w1.resize(dims.hidden_dim, dims.input_dim());
  for (Eigen::Index r = 0; r < bb.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < bb.w1.cols(); ++c) {
      bb.w1(r, c) = rng.normal(0.0, s1);
    }
  }
  bb.b1 = Eigen::VectorXd::Zero(dims.hidden_dim);
  bb.w2.resize(dims.embed_dim, dims.hidden_dim);
  for (Eigen::Index r = 0; r < bb.w2.rows(); ++r) {
    for (Eigen::Index c = 0; c < bb.w2.cols(); ++c) {
      bb.w2(r, c) = rng.normal(0.0, s2);
    }
  }
  bb.b2 = Eigen::VectorXd::Zero(dims.embed_dim);
  return bb;
}

std::vector<ParamBlockView> param_blocks(ModelParams& params) {
  std::vector<ParamBlockView> out;
  auto& bb = params.backbone;
  out.push_back({"backbone.w1", span_of(bb.w1)});
  out.push_back({"backbone.b1", span_of(bb.b1)});
  out.push_back({"backbone.w2", span_of(bb.w2)});
  out.push_back({"backbone.b2", span_of(bb.b2)});
  auto add = [&out](ClassifierBlock& b) {
    out.push_back({block_name(b) + ".weight", span_of(b.weight)});
    out.push_back({block_name(b) + ".bias", span_of(b.bias)});
  };
  for (auto& b : params.classifiers.blocks) add(b);
  if (params.classifiers.future) add(*params.classifiers.future);
  return out;
}

std::vector<ParamBlockConstView> param_blocks(const ModelParams& params) {
  std::vector<ParamBlockConstView> out;
  for (auto& v : param_blocks(const_cast<ModelParams&>(params))) {
    out.push_back({std::move(v.name), v.values});
  }
  return out;
}

TrainableMask trainable_mask(const SegModel& model) {
  TrainableMask mask(4, !model.backbone_frozen);
  const auto& bank = model.classifiers();
  for (const auto& b : bank.blocks) {
    mask.push_back(!b.frozen);
    mask.push_back(!b.frozen);
  }
  if (bank.future) {
    mask.push_back(!bank.future->frozen);
    mask.push_back(!bank.future->frozen);
  }
  return mask;
}

TrainableMask all_trainable(const ModelParams& params) {
  return TrainableMask(param_blocks(params).size(), true);
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& v : param_blocks(z)) std::fill(v.values.begin(), v.values.end(), 0.0);
  return z;
}

Eigen::MatrixXd backbone_input(const BackboneParams& backbone,
                               const FeatureGrid& grid) {
  check_grid(backbone, grid);
  const Eigen::Index d = grid.feat_dim;
  const Eigen::Index n = static_cast<Eigen::Index>(grid.pixels());
  const Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>>
      raw(grid.features.data(), d, n);
  if (!backbone.local_context) return raw.cast<double>();

  Eigen::MatrixXd x(2 * d, n);
  x.topRows(d) = raw.cast<double>();
  const int h = static_cast<int>(grid.height);
  const int w = static_cast<int>(grid.width);
  for (int py = 0; py < h; ++py) {
    for (int px = 0; px < w; ++px) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = py + dy;
          const int xx = px + dx;
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
          acc += x.col(yy * w + xx).head(d);
          ++count;
        }
      }
      x.col(py * w + px).tail(d) = acc / count;
    }
  }
  return x;
}

Eigen::MatrixXd embed(const BackboneParams& backbone, const FeatureGrid& grid) {
  const Eigen::MatrixXd x = backbone_input(backbone, grid);
  const Eigen::MatrixXd h =
      ((backbone.w1 * x).colwise() + backbone.b1).cwiseMax(0.0);
  return (backbone.w2 * h).colwise() + backbone.b2;
}

std::vector<ClassId> active_classes(const ClassifierBank& bank) {
  std::vector<ClassId> out = bank.learned_classes();
  if (bank.future) {
    out.insert(out.end(), bank.future->classes.begin(),
               bank.future->classes.end());
  }
  return out;
}

Eigen::MatrixXd stacked_weights(const ClassifierBank& bank,
                                bool include_future) {
  Eigen::Index rows = bank.learned_rows();
  if (include_future && bank.future) rows += bank.future->rows();
  Eigen::Index cols = 0;
  if (!bank.blocks.empty()) cols = bank.blocks.front().weight.cols();
  else if (bank.future) cols = bank.future->weight.cols();
  Eigen::MatrixXd w(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : bank.blocks) {
    w.middleRows(r, b.rows()) = b.weight;
    r += b.rows();
  }
  if (include_future && bank.future) w.bottomRows(bank.future->rows()) =
      bank.future->weight;
  return w;
}

Eigen::VectorXd stacked_bias(const ClassifierBank& bank, bool include_future) {
  Eigen::Index rows = bank.learned_rows();
  if (include_future && bank.future) rows += bank.future->rows();
  Eigen::VectorXd v(rows);
  Eigen::Index r = 0;
  for (const auto& b : bank.blocks) {
    v.segment(r, b.rows()) = b.bias;
    r += b.rows();
  }
  if (include_future && bank.future) v.tail(bank.future->rows()) =
      bank.future->bias;
  return v;
}

Eigen::MatrixXd forward(const SegModel& model, const FeatureGrid& grid) {
  const auto& bank = model.classifiers();
  if (bank.blocks.empty() && !bank.future) {
    throw Error(kModule, ErrorKind::kState, "empty classifier bank");
  }
  const Eigen::MatrixXd z = embed(model.backbone(), grid);
  if (stacked_weights(bank, true).cols() != z.rows()) {
    throw Error(kModule, ErrorKind::kShape,
                "classifier width differs from embedding dim");
  }
  return (stacked_weights(bank, true) * z).colwise() +
         stacked_bias(bank, true);
}

std::vector<ClassId> predict_from_embedding(const ClassifierBank& bank,
                                            const Eigen::MatrixXd& z) {
  if (bank.blocks.empty()) {
    throw Error(kModule, ErrorKind::kState, "no learned classes to predict");
  }
  const std::vector<ClassId> classes = bank.learned_classes();
  const Eigen::MatrixXd logits =
      (stacked_weights(bank, false) * z).colwise() + stacked_bias(bank, false);
  std::vector<ClassId> pred(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index p = 0; p < z.cols(); ++p) {
    Eigen::Index best = 0;
    logits.col(p).maxCoeff(&best);
    pred[static_cast<std::size_t>(p)] = classes[static_cast<std::size_t>(best)];
  }
  return pred;
}

std::vector<ClassId> predict_learned(const SegModel& model,
                                     const FeatureGrid& grid) {
  return predict_from_embedding(model.classifiers(),
                                embed(model.backbone(), grid));
}

LossAndGrads loss_and_grads(const SegModel& model,
                            std::span<const FeatureGrid> batch,
                            const TrainableMask& mask) {
  std::vector<const FeatureGrid*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& g : batch) ptrs.push_back(&g);
  if (ptrs.empty()) {
    throw Error(kModule, ErrorKind::kLoss, "empty batch");
  }
  return loss_and_grads_impl(model, ptrs, {}, mask);
}

LossAndGrads head_loss_and_grads(const SegModel& model,
                                 std::span<const EmbeddedGrid> batch,
                                 const TrainableMask& mask) {
  if (batch.empty()) {
    throw Error(kModule, ErrorKind::kLoss, "empty batch");
  }
  return loss_and_grads_impl(model, {}, batch, mask);
}

double poly_lr(double lr0, long iter, long total_iters, double power) {
  if (total_iters < 1 || iter < 0 || iter > total_iters) {
    throw Error(kModule, ErrorKind::kRange,
                "poly schedule iteration " + std::to_string(iter) +
                    " outside 0.." + std::to_string(total_iters));
  }
  return lr0 * std::pow(1.0 - static_cast<double>(iter) /
                                   static_cast<double>(total_iters),
                        power);
}

void sgd_step(ModelParams& params, const ModelParams& grads,
              ModelParams& velocity, const SgdParams& sgd,
              const TrainableMask& mask) {
  auto p = param_blocks(params);
  const auto g = param_blocks(grads);
  auto v = param_blocks(velocity);
  if (p.size() != g.size() || p.size() != v.size() || p.size() != mask.size()) {
    throw Error(kModule, ErrorKind::kShape,
                "parameter, gradient, velocity and mask layouts differ");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].values.size() != g[i].values.size() ||
        p[i].values.size() != v[i].values.size()) {
      throw Error(kModule, ErrorKind::kShape,
                  "size mismatch in block " + p[i].name);
    }
    if (!mask[i]) continue;
    for (double x : g[i].values) {
      if (!std::isfinite(x)) {
        throw Error(kModule, ErrorKind::kNumeric,
                    "non-finite gradient in " + p[i].name);
      }
    }
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!mask[i]) continue;
    auto w = p[i].values;
    auto vel = v[i].values;
    const auto grad = g[i].values;
    for (std::size_t j = 0; j < w.size(); ++j) {
      vel[j] = sgd.momentum * vel[j] + grad[j] + sgd.weight_decay * w[j];
      w[j] -= sgd.lr * vel[j];
    }
  }
}

long count_trainable(const SegModel& model) {
  long n = 0;
  if (!model.backbone_frozen) {
    const auto& bb = model.backbone();
    n += static_cast<long>(bb.w1.size() + bb.b1.size() + bb.w2.size() +
                           bb.b2.size());
  }
  auto add = [&n](const ClassifierBlock& b) {
    if (!b.frozen) n += static_cast<long>(b.weight.size() + b.bias.size());
  };
  for (const auto& b : model.classifiers().blocks) add(b);
  if (model.classifiers().future) add(*model.classifiers().future);
  return n;
}

void train_sgd(SegModel& model, std::span<const FeatureGrid> images,
               const Hyper& hyper, int epochs, RngStream& shuffle_rng) {
  validate(hyper);
  if (images.empty()) {
    throw Error(kModule, ErrorKind::kState, "no training images");
  }
  const TrainableMask mask = trainable_mask(model);
  const bool cached = !backbone_trainable(mask);
  std::vector<Eigen::MatrixXd> z;
  if (cached) {
    z.reserve(images.size());
    for (const auto& g : images) z.push_back(embed(model.backbone(), g));
  }

  const long n = static_cast<long>(images.size());
  const long batch = hyper.batch_size;
  const long per_epoch = (n + batch - 1) / batch;
  const long total = static_cast<long>(epochs) * per_epoch;
  ModelParams velocity = zeros_like(model.params);
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);

  long iter = 0;
  std::vector<const FeatureGrid*> grids;
  std::vector<EmbeddedGrid> embedded;
  for (int e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (long start = 0; start < n; start += batch) {
      const long stop = std::min(n, start + batch);
      LossAndGrads lg;
      if (cached) {
        embedded.clear();
        for (long i = start; i < stop; ++i) {
          const std::size_t k = order[static_cast<std::size_t>(i)];
          embedded.push_back({&z[k], images[k].labels});
        }
        lg = loss_and_grads_impl(model, {}, embedded, mask);
      } else {
        grids.clear();
        for (long i = start; i < stop; ++i) {
          grids.push_back(&images[order[static_cast<std::size_t>(i)]]);
        }
        lg = loss_and_grads_impl(model, grids, {}, mask);
      }
      const double factor = poly_lr(1.0, iter, total, hyper.poly_power);
      SgdParams sgd{hyper.lr0, hyper.momentum, hyper.weight_decay};
      if (hyper.poly_target == PolyTarget::kLearningRate) {
        sgd.lr *= factor;
      } else {
        sgd.weight_decay *= factor;
      }
      sgd_step(model.params, lg.grads, velocity, sgd, mask);
      ++iter;
    }
  }
}

}  // namespace csslab
