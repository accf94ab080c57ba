#include "csslab/checkpoint.h"

#include <fstream>
#include <iterator>
#include <string>

#include "byte_io.h"
#include "csslab/errors.h"

namespace csslab {
namespace {

constexpr std::string_view kModule = "model";
constexpr std::string_view kMagic = "CSSM";

void put_matrix(internal::ByteWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
}

void get_matrix(internal::ByteReader& r, Eigen::MatrixXd& m,
                std::uint64_t rows, std::uint64_t cols) {
  r.need(rows * cols * 8);
  m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  }
}

void get_vector(internal::ByteReader& r, Eigen::VectorXd& v,
                std::uint64_t n) {
  r.need(n * 8);
  v.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = r.f64();
}

void put_block(internal::ByteWriter& w, const ClassifierBlock& b) {
  w.u32(static_cast<std::uint32_t>(b.step));
  w.u32(static_cast<std::uint32_t>(b.rows()));
  w.u32(b.frozen ? 1 : 0);
  for (ClassId c : b.classes) w.u32(c);
  put_matrix(w, b.weight);
  for (Eigen::Index i = 0; i < b.bias.size(); ++i) w.f64(b.bias(i));
}

ClassifierBlock get_block(internal::ByteReader& r, std::uint32_t embed) {
  ClassifierBlock b;
  b.step = static_cast<int>(r.u32());
  const std::uint32_t rows = r.u32();
  const std::uint32_t frozen = r.u32();
  if (frozen > 1) r.fail("frozen flag must be 0 or 1");
  b.frozen = frozen == 1;
  r.need(static_cast<std::uint64_t>(rows) * 4);
  for (std::uint32_t i = 0; i < rows; ++i) {
    const std::uint32_t id = r.u32();
    if (id > 0xFFFF) r.fail("class id out of range");
    b.classes.push_back(static_cast<ClassId>(id));
  }
  get_matrix(r, b.weight, rows, embed);
  get_vector(r, b.bias, rows);
  return b;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const SegModel& model) {
  const BackboneParams& bb = model.backbone();
  const ModelDims dims = bb.dims();
  internal::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(dims.feat_dim);
  w.u32(dims.hidden_dim);
  w.u32(dims.embed_dim);
  w.u32(dims.local_context ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(model.strategy));
  w.u32(static_cast<std::uint32_t>(model.current_step));
  w.u32(model.backbone_frozen ? 1 : 0);
  put_matrix(w, bb.w1);
  for (Eigen::Index i = 0; i < bb.b1.size(); ++i) w.f64(bb.b1(i));
  put_matrix(w, bb.w2);
  for (Eigen::Index i = 0; i < bb.b2.size(); ++i) w.f64(bb.b2(i));
  const auto& bank = model.classifiers();
  w.u32(static_cast<std::uint32_t>(bank.blocks.size()));
  for (const auto& b : bank.blocks) put_block(w, b);
  w.u32(bank.future ? 1 : 0);
  if (bank.future) put_block(w, *bank.future);
  return w.take();
}

SegModel decode_checkpoint(std::span<const std::uint8_t> bytes) {
  internal::ByteReader r(bytes, kModule);
  if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw Error(kModule, ErrorKind::kFormat,
                "bad checkpoint magic at offset 0");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    r.fail("unsupported checkpoint version " + std::to_string(version));
  }
  ModelDims dims;
  dims.feat_dim = r.u32();
  dims.hidden_dim = r.u32();
  dims.embed_dim = r.u32();
  dims.local_context = r.u32() != 0;
  SegModel model;
  const std::uint32_t strategy = r.u32();
  if (strategy > static_cast<std::uint32_t>(Strategy::kJoint)) {
    r.fail("unknown strategy code " + std::to_string(strategy));
  }
  model.strategy = static_cast<Strategy>(strategy);
  model.current_step = static_cast<int>(r.u32());
  model.backbone_frozen = r.u32() != 0;

  BackboneParams& bb = model.params.backbone;
  bb.local_context = dims.local_context;
  get_matrix(r, bb.w1, dims.hidden_dim, dims.input_dim());
  get_vector(r, bb.b1, dims.hidden_dim);
  get_matrix(r, bb.w2, dims.embed_dim, dims.hidden_dim);
  get_vector(r, bb.b2, dims.embed_dim);

  const std::uint32_t blocks = r.u32();
  for (std::uint32_t i = 0; i < blocks; ++i) {
    model.params.classifiers.blocks.push_back(get_block(r, dims.embed_dim));
  }
  if (r.u32() != 0) {
    model.params.classifiers.future = get_block(r, dims.embed_dim);
  }
  if (r.remaining() != 0) r.fail("trailing bytes");
  return model;
}

void save_checkpoint(const SegModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(model));
}

SegModel load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("io", ErrorKind::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("io", ErrorKind::kIo, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("io", ErrorKind::kIo, "short write to " + path.string());
  }
}

}  // namespace csslab
