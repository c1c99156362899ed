#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedprint/nn/arch.hpp"

namespace fedprint::nn {

inline constexpr char kCheckpointMagic[4] = {'F', 'P', 'W', 'T'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  ArchConfig arch;
  std::vector<float> params;
};

/// "FPWT" | version u16 | arch fields | tensor count u32 | per tensor:
/// rank u32, dims u32... | f32 tensors in declaration order. Little-endian.
std::vector<std::uint8_t> encode_checkpoint(const ArchConfig& arch, std::span<const float> params);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

/// Exact encoded size; depends only on the architecture.
std::size_t checkpoint_size(const ArchConfig& arch);

void save_checkpoint(const std::filesystem::path& path, const ArchConfig& arch, std::span<const float> params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fedprint::nn
