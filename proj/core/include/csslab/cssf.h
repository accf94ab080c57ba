#ifndef CSSLAB_CSSF_H_
#define CSSLAB_CSSF_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csslab/feature_grid.h"

namespace csslab {

// CSSF little-endian layout:
//   "CSSF1\0"                         6 bytes
//   u32 num_images, H, W, d, N        20 bytes
//   per image: H*W*d float32 features (row-major), then H*W u16 labels
std::vector<std::uint8_t> encode_cssf(const Dataset& dataset);
Dataset decode_cssf(std::span<const std::uint8_t> bytes);

void save_cssf(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_cssf(const std::filesystem::path& path);

}  // namespace csslab

#endif  // CSSLAB_CSSF_H_
