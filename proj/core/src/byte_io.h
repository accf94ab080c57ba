#ifndef CSSLAB_SRC_BYTE_IO_H_
#define CSSLAB_SRC_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csslab/errors.h"

namespace csslab::internal {

// Little-endian encoder.
class ByteWriter {
 public:
  void bytes(std::string_view raw) {
    buf_.insert(buf_.end(), raw.begin(), raw.end());
  }
  void u16(std::uint16_t v) { put(v); }
  void u32(std::uint32_t v) { put(v); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }

  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> buf_;
};

// Little-endian decoder; every failure reports the byte offset.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string_view module)
      : data_(data), module_(module) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(module_, ErrorKind::kFormat,
                what + " at offset " + std::to_string(pos_));
  }

  void need(std::size_t n) const {
    if (remaining() < n) {
      fail("truncated payload: need " + std::to_string(n) + " bytes, have " +
           std::to_string(remaining()));
    }
  }

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view out(reinterpret_cast<const char*>(data_.data() + pos_),
                         n);
    pos_ += n;
    return out;
  }
  std::uint16_t u16() { return get<std::uint16_t>(); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  float f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

 private:
  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(data_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::string module_;
  std::size_t pos_ = 0;
};

}  // namespace csslab::internal

#endif  // CSSLAB_SRC_BYTE_IO_H_
