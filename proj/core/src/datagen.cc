#include "csslab/datagen.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "csslab/errors.h"
#include "csslab/rng.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "datagen";

struct MixingLayer {
  std::vector<double> a;  // d x d row-major
  std::vector<double> c;
};

struct Generator {
  const SynthParams& p;
  std::vector<std::vector<double>> means;  // ids 0..N, then background #2
  std::vector<MixingLayer> layers;

  explicit Generator(const SynthParams& params) : p(params) {
    RngStream rng(p.seed, StreamTag::kDataGlobal);
    const std::size_t d = p.feat_dim;
    means.resize(p.num_classes + 2);
    for (auto& m : means) {
      m.resize(d);
      double norm = 0.0;
      do {
        norm = 0.0;
        for (auto& v : m) {
          v = rng.normal(0.0, 1.0);
          norm += v * v;
        }
      } while (norm == 0.0);
      norm = std::sqrt(norm);
      for (auto& v : m) v /= norm;
    }
    const double scale = p.mixing_gain / std::sqrt(static_cast<double>(d));
    layers.resize(p.mixing_depth);
    for (auto& layer : layers) {
      layer.a.resize(d * d);
      layer.c.resize(d);
      for (auto& v : layer.a) v = rng.normal(0.0, 1.0) * scale;
      for (auto& v : layer.c) v = rng.normal(0.0, 1.0) * 0.1;
    }
  }

  void mix(std::vector<double>& x, std::vector<double>& scratch) const {
    const std::size_t d = p.feat_dim;
    for (const auto& layer : layers) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = layer.c[i];
        for (std::size_t j = 0; j < d; ++j) acc += layer.a[i * d + j] * x[j];
        scratch[i] = std::tanh(acc);
      }
      x.swap(scratch);
    }
  }

  FeatureGrid image(std::uint64_t global_index, ClassId primary,
                    std::vector<PlacedRect>& rects) const {
    RngStream rng(p.seed, StreamTag::kDataImage, global_index);
    FeatureGrid g;
    g.height = p.height;
    g.width = p.width;
    g.feat_dim = p.feat_dim;
    g.labels.assign(g.pixels(), kBackground);
    g.features.resize(g.pixels() * p.feat_dim);

    const int count = rng.uniform_int(static_cast<int>(p.objects_min),
                                      static_cast<int>(p.objects_max));
    rects.clear();
    for (int j = 0; j < count; ++j) {
      PlacedRect r;
      r.class_id = j == count - 1
                       ? primary
                       : static_cast<ClassId>(rng.uniform_int(
                             1, static_cast<int>(p.num_classes)));
      r.w = static_cast<std::uint32_t>(
          rng.uniform_int(static_cast<int>(p.object_min_side),
                          static_cast<int>(p.object_max_side)));
      r.h = static_cast<std::uint32_t>(
          rng.uniform_int(static_cast<int>(p.object_min_side),
                          static_cast<int>(p.object_max_side)));
      r.x0 = static_cast<std::uint32_t>(
          rng.uniform_int(0, static_cast<int>(p.width - r.w)));
      r.y0 = static_cast<std::uint32_t>(
          rng.uniform_int(0, static_cast<int>(p.height - r.h)));
      rects.push_back(r);
    }
    for (const auto& r : rects) {
      for (std::uint32_t y = r.y0; y < r.y0 + r.h; ++y) {
        for (std::uint32_t x = r.x0; x < r.x0 + r.w; ++x) {
          g.labels[static_cast<std::size_t>(y) * p.width + x] = r.class_id;
        }
      }
    }

    // Background texture: a plane wave blending two background means.
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double freq = 2.0 * std::numbers::pi / 8.0;
    const std::size_t d = p.feat_dim;
    const auto& bg_a = means[0];
    const auto& bg_b = means[p.num_classes + 1];
    std::vector<double> x(d), scratch(d);
    for (std::uint32_t py = 0; py < p.height; ++py) {
      for (std::uint32_t px = 0; px < p.width; ++px) {
        const std::size_t idx = static_cast<std::size_t>(py) * p.width + px;
        const ClassId label = g.labels[idx];
        if (label == kBackground) {
          const double s =
              0.5 + 0.5 * std::sin(phase + freq * (px * std::cos(angle) +
                                                   py * std::sin(angle)));
          for (std::size_t k = 0; k < d; ++k) {
            x[k] = (1.0 - s) * bg_a[k] + s * bg_b[k];
          }
        } else {
          std::copy(means[label].begin(), means[label].end(), x.begin());
        }
        for (std::size_t k = 0; k < d; ++k) {
          x[k] += p.noise_sigma * rng.normal(0.0, 1.0);
        }
        mix(x, scratch);
        for (std::size_t k = 0; k < d; ++k) {
          g.features[idx * d + k] = static_cast<float>(x[k]);
        }
      }
    }
    return g;
  }
};

Dataset empty_like(const SynthParams& p) {
  Dataset ds;
  ds.num_classes = p.num_classes;
  ds.height = p.height;
  ds.width = p.width;
  ds.feat_dim = p.feat_dim;
  return ds;
}

}  // namespace

void validate(const SynthParams& p) {
  auto fail = [](const std::string& what) {
    throw Error(kModule, ErrorKind::kValidation, what);
  };
  if (p.num_classes < 1 || p.num_classes > 65533) {
    fail("num_classes must be in 1..65533");
  }
  if (p.feat_dim < 1) fail("feat_dim must be >= 1");
  if (p.height < 1 || p.width < 1) fail("grid extents must be >= 1");
  if (p.images_per_class < 1 || p.eval_images_per_class < 1) {
    fail("images per class must be >= 1");
  }
  if (p.objects_min < 1 || p.objects_min > p.objects_max) {
    fail("objects per image must satisfy 1 <= min <= max");
  }
  if (!std::isfinite(p.noise_sigma) || p.noise_sigma < 0.0) {
    fail("noise_sigma must be finite and >= 0");
  }
  if (!std::isfinite(p.mixing_gain)) fail("mixing_gain must be finite");
  if (p.object_min_side < 1 || p.object_min_side > p.object_max_side) {
    fail("object sides must satisfy 1 <= min <= max");
  }
  if (p.object_max_side > std::min(p.height, p.width)) {
    throw Error(kModule, ErrorKind::kGeneration,
                "grid " + std::to_string(p.height) + "x" +
                    std::to_string(p.width) +
                    " too small for objects of side up to " +
                    std::to_string(p.object_max_side));
  }
}

GeneratedData generate_dataset(const SynthParams& params) {
  validate(params);
  const Generator gen(params);
  GeneratedData out;
  out.train = empty_like(params);
  out.eval = empty_like(params);

  const std::uint64_t n_train =
      static_cast<std::uint64_t>(params.num_classes) * params.images_per_class;
  const std::uint64_t n_eval = static_cast<std::uint64_t>(params.num_classes) *
                               params.eval_images_per_class;
  out.train.images.reserve(n_train);
  out.train_rects.resize(n_train);
  for (std::uint64_t i = 0; i < n_train; ++i) {
    const auto primary =
        static_cast<ClassId>(1 + i / params.images_per_class);
    out.train.images.push_back(gen.image(i, primary, out.train_rects[i]));
  }
  out.eval.images.reserve(n_eval);
  out.eval_rects.resize(n_eval);
  for (std::uint64_t j = 0; j < n_eval; ++j) {
    const auto primary =
        static_cast<ClassId>(1 + j / params.eval_images_per_class);
    out.eval.images.push_back(
        gen.image(n_train + j, primary, out.eval_rects[j]));
  }
  return out;
}

}  // namespace csslab
