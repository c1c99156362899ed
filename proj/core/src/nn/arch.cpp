#include "fedprint/nn/arch.hpp"

#include <cmath>

namespace fedprint::nn {

void ArchConfig::validate() const {
  if (num_conv_blocks < 1 || num_conv_blocks > 3) throw ShapeError("num_conv_blocks must be 1, 2 or 3");
  if (filters < 1 || kernel_size < 1 || input_channels < 1) throw ShapeError("filters, kernel and channels must be >= 1");
  if (num_classes < 2) throw ShapeError("num_classes must be >= 2");
  if (stride < 1) throw ShapeError("stride must be >= 1");
  if (pool_width < 2) throw ShapeError("pool_width must be >= 2");
  if (!std::isfinite(leaky_slope)) throw ShapeError("leaky_slope must be finite");
  std::size_t divisor = 1;
  for (std::uint32_t i = 0; i < num_conv_blocks; ++i) divisor *= pool_width;
  if (input_len == 0 || input_len % divisor != 0) {
    throw ShapeError("input_len " + std::to_string(input_len) + " is not divisible by " + std::to_string(divisor) +
                     " (pool_width^num_conv_blocks)");
  }
  std::size_t n = input_len;
  for (std::uint32_t i = 0; i < num_conv_blocks; ++i) {
    if (n + 2 * padding() < kernel_size) throw ShapeError("conv input shorter than kernel in block " + std::to_string(i));
    const std::size_t conv = 1 + (n + 2 * padding() - kernel_size) / stride;
    if (conv < pool_width) throw ShapeError("conv output shorter than pool width in block " + std::to_string(i));
    n = conv / pool_width;
  }
}

std::vector<BlockGeometry> block_geometry(const ArchConfig& arch) {
  arch.validate();
  std::vector<BlockGeometry> out;
  std::size_t n = arch.input_len;
  std::size_t ch = arch.input_channels;
  for (std::uint32_t i = 0; i < arch.num_conv_blocks; ++i) {
    BlockGeometry g{};
    g.in_channels = ch;
    g.in_len = n;
    g.conv_len = 1 + (n + 2 * arch.padding() - arch.kernel_size) / arch.stride;
    g.pool_len = g.conv_len / arch.pool_width;
    out.push_back(g);
    n = g.pool_len;
    ch = arch.filters;
  }
  return out;
}

std::size_t flatten_dim(const ArchConfig& arch) {
  return static_cast<std::size_t>(arch.filters) * block_geometry(arch).back().pool_len;
}

std::vector<TensorSpec> parameter_layout(const ArchConfig& arch) {
  std::vector<TensorSpec> out;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    std::size_t size = 1;
    for (std::size_t d : shape) size *= d;
    out.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  const auto blocks = block_geometry(arch);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    add("conv" + std::to_string(i) + ".weight", {arch.filters, blocks[i].in_channels, arch.kernel_size});
    add("conv" + std::to_string(i) + ".bias", {arch.filters});
  }
  add("dense.weight", {arch.num_classes, flatten_dim(arch)});
  add("dense.bias", {arch.num_classes});
  return out;
}

std::size_t parameter_count(const ArchConfig& arch) {
  const auto layout = parameter_layout(arch);
  return layout.back().offset + layout.back().size;
}

}  // namespace fedprint::nn
