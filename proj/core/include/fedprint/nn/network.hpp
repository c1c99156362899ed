#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedprint/common/rng.hpp"
#include "fedprint/nn/arch.hpp"

namespace fedprint::nn {

/// Activations cached by forward() and consumed by backward().
template <typename T>
struct Workspace {
  struct Block {
    std::vector<T> conv_out;  // pre-activation
    std::vector<T> pool_out;
    std::vector<std::uint32_t> argmax;
  };
  std::size_t batch = 0;
  bool has_forward = false;
  std::vector<T> input;
  std::vector<Block> blocks;
  std::vector<T> logits;
  // Per-sample scratch.
  std::vector<T> act;
  std::vector<T> grad_a;
  std::vector<T> grad_b;
};

/// The convolutional classifier over a flat parameter vector laid out as in
/// parameter_layout(). Inputs are channels-first [B][channels][L].
template <typename T>
class BasicNetwork {
 public:
  explicit BasicNetwork(const ArchConfig& arch);

  const ArchConfig& arch() const noexcept { return arch_; }
  const std::vector<TensorSpec>& layout() const noexcept { return layout_; }
  std::size_t flatten_dim() const noexcept { return flatten_dim_; }

  std::span<T> parameters() noexcept { return params_; }
  std::span<const T> parameters() const noexcept { return params_; }
  void set_parameters(std::span<const T> values);

  /// Glorot-uniform weights, zero biases.
  void init_glorot(Rng& rng);

  /// Fills ws.logits ([B][C]).
  void forward(std::span<const T> inputs, std::size_t batch, Workspace<T>& ws) const;

  /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(logits).
  /// Throws std::logic_error if `ws` holds no forward pass.
  void backward(std::span<const T> grad_logits, Workspace<T>& ws, std::span<T> grads) const;

 private:
  std::span<const T> tensor(std::size_t i) const { return std::span<const T>(params_).subspan(layout_[i].offset, layout_[i].size); }

  ArchConfig arch_;
  std::vector<TensorSpec> layout_;
  std::vector<BlockGeometry> blocks_;
  std::size_t flatten_dim_ = 0;
  std::vector<T> params_;
};

using Network = BasicNetwork<float>;

extern template class BasicNetwork<float>;
extern template class BasicNetwork<double>;

}  // namespace fedprint::nn
