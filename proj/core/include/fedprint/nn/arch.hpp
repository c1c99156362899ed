#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprint::nn {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// M x [Conv1D(F, k) -> LeakyReLU -> MaxPool(2)] -> Flatten -> Dense(C).
struct ArchConfig {
  std::uint32_t num_conv_blocks = 2;
  std::uint32_t filters = 25;
  std::uint32_t kernel_size = 3;
  std::uint32_t input_len = 1024;
  std::uint32_t input_channels = 2;
  std::uint32_t num_classes = 20;
  double leaky_slope = 0.1;
  std::uint32_t stride = 1;
  std::uint32_t pool_width = 2;

  /// Zero padding that keeps conv length unchanged at stride 1.
  std::uint32_t padding() const noexcept { return (kernel_size - 1) / 2; }

  /// Throws ShapeError for unsupported or inconsistent settings.
  void validate() const;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

struct BlockGeometry {
  std::size_t in_channels;
  std::size_t in_len;
  std::size_t conv_len;
  std::size_t pool_len;
};

std::vector<BlockGeometry> block_geometry(const ArchConfig& arch);

/// Length of the flattened feature vector fed to the dense layer.
std::size_t flatten_dim(const ArchConfig& arch);

struct TensorSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Parameter tensors in declaration order: conv{i}.weight [F, Cin, k],
/// conv{i}.bias [F], ..., dense.weight [C, D], dense.bias [C].
std::vector<TensorSpec> parameter_layout(const ArchConfig& arch);

std::size_t parameter_count(const ArchConfig& arch);

}  // namespace fedprint::nn
