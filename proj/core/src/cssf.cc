#include "csslab/cssf.h"

#include <string>

#include "byte_io.h"
#include "csslab/checkpoint.h"
#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "datagen";
constexpr std::string_view kMagic{"CSSF1\0", 6};

}  // namespace

std::vector<std::uint8_t> encode_cssf(const Dataset& dataset) {
  validate_dataset(dataset);
  internal::ByteWriter w;
  w.bytes(kMagic);
  w.u32(static_cast<std::uint32_t>(dataset.images.size()));
  w.u32(dataset.height);
  w.u32(dataset.width);
  w.u32(dataset.feat_dim);
  w.u32(dataset.num_classes);
  for (const auto& g : dataset.images) {
    for (float v : g.features) w.f32(v);
    for (ClassId l : g.labels) w.u16(l);
  }
  return w.take();
}

Dataset decode_cssf(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes, kModule);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw Error(kModule, ErrorKind::kFormat, "bad magic at offset 0");
  }
  Dataset ds;
  const std::uint32_t n = r.u32();
  ds.height = r.u32();
  ds.width = r.u32();
  ds.feat_dim = r.u32();
  ds.num_classes = r.u32();
  if (n > 0 && (ds.height == 0 || ds.width == 0 || ds.feat_dim == 0)) {
    r.fail("extent mismatch: zero image extent");
  }
  const std::uint64_t pixels =
      static_cast<std::uint64_t>(ds.height) * ds.width;
  const std::uint64_t per_image = pixels * ds.feat_dim * 4 + pixels * 2;
  if (per_image != 0 && r.remaining() / per_image < n) {
    r.fail("truncated payload: " + std::to_string(n) + " images of " +
           std::to_string(per_image) + " bytes declared, " +
           std::to_string(r.remaining()) + " bytes present");
  }
  ds.images.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    FeatureGrid g;
    g.height = ds.height;
    g.width = ds.width;
    g.feat_dim = ds.feat_dim;
    g.features.resize(pixels * ds.feat_dim);
    g.labels.resize(pixels);
    for (auto& v : g.features) v = r.f32();
    for (auto& l : g.labels) {
      l = r.u16();
      if (l != kIgnore && l > ds.num_classes) {
        r.fail("label " + std::to_string(l) + " exceeds N=" +
               std::to_string(ds.num_classes));
      }
    }
    ds.images.push_back(std::move(g));
  }
  if (r.remaining() != 0) {
    r.fail("extent mismatch: " + std::to_string(r.remaining()) +
           " trailing bytes");
  }
  return ds;
}

void save_cssf(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_bytes(path, encode_cssf(dataset));
}

Dataset load_cssf(const std::filesystem::path& path) {
  return decode_cssf(read_file_bytes(path));
}

}  // namespace csslab
