#ifndef CSSLAB_CHECKPOINT_H_
#define CSSLAB_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "csslab/model.h"

namespace csslab {

// Binary layout is documented in docs/formats.md.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const SegModel& model);
SegModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const SegModel& model, const std::filesystem::path& path);
SegModel load_checkpoint(const std::filesystem::path& path);

// Shared by cssf and checkpoint I/O.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace csslab

#endif  // CSSLAB_CHECKPOINT_H_
