#include "fedprint/nn/network.hpp"

#include <cmath>
#include <stdexcept>

#include "fedprint/nn/layers.hpp"

namespace fedprint::nn {

template <typename T>
BasicNetwork<T>::BasicNetwork(const ArchConfig& arch)
    : arch_(arch),
      layout_(parameter_layout(arch)),
      blocks_(block_geometry(arch)),
      flatten_dim_(nn::flatten_dim(arch)),
      params_(parameter_count(arch), T(0)) {}

template <typename T>
void BasicNetwork<T>::set_parameters(std::span<const T> values) {
  if (values.size() != params_.size()) {
    throw ShapeError("parameter vector has " + std::to_string(values.size()) + " values, architecture needs " +
                     std::to_string(params_.size()));
  }
  std::copy(values.begin(), values.end(), params_.begin());
}

template <typename T>
void BasicNetwork<T>::init_glorot(Rng& rng) {
  for (const TensorSpec& t : layout_) {
    T* p = params_.data() + t.offset;
    if (t.shape.size() == 1) {
      std::fill(p, p + t.size, T(0));
      continue;
    }
    double fan_in = 0.0;
    double fan_out = 0.0;
    if (t.shape.size() == 3) {  // [F, Cin, k]
      fan_in = static_cast<double>(t.shape[1] * t.shape[2]);
      fan_out = static_cast<double>(t.shape[0] * t.shape[2]);
    } else {  // [C, D]
      fan_in = static_cast<double>(t.shape[1]);
      fan_out = static_cast<double>(t.shape[0]);
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < t.size; ++i) p[i] = static_cast<T>(dist(rng));
  }
}

// Layers run one sample at a time so a sample's activations stay in cache.
template <typename T>
void BasicNetwork<T>::forward(std::span<const T> inputs, std::size_t batch, Workspace<T>& ws) const {
  if (batch == 0) throw ShapeError("forward: empty batch");
  const std::size_t sample = arch_.input_channels * arch_.input_len;
  const std::size_t in_size = batch * sample;
  if (inputs.size() != in_size) {
    throw ShapeError("forward: expected " + std::to_string(in_size) + " input values, got " +
                     std::to_string(inputs.size()));
  }
  ws.has_forward = false;
  ws.batch = batch;
  ws.input.assign(inputs.begin(), inputs.end());
  ws.blocks.resize(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    ws.blocks[i].conv_out.resize(batch * arch_.filters * blocks_[i].conv_len);
    ws.blocks[i].pool_out.resize(batch * arch_.filters * blocks_[i].pool_len);
    ws.blocks[i].argmax.resize(ws.blocks[i].pool_out.size());
  }
  ws.logits.resize(batch * arch_.num_classes);

  const T slope = static_cast<T>(arch_.leaky_slope);
  const std::size_t dense = 2 * blocks_.size();
  for (std::size_t b = 0; b < batch; ++b) {
    std::span<const T> x = std::span<const T>(ws.input).subspan(b * sample, sample);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const BlockGeometry& bg = blocks_[i];
      auto& blk = ws.blocks[i];
      const Conv1dGeometry g{1, bg.in_channels, bg.in_len, arch_.filters, arch_.kernel_size, arch_.stride,
                             arch_.padding()};
      const std::size_t conv_n = arch_.filters * bg.conv_len;
      const std::size_t pool_n = arch_.filters * bg.pool_len;
      std::span<T> conv = std::span<T>(blk.conv_out).subspan(b * conv_n, conv_n);
      conv1d_forward<T>(g, x, tensor(2 * i), tensor(2 * i + 1), conv);
      ws.act.resize(conv_n);
      leaky_relu_forward<T>(conv, ws.act, slope);
      std::span<T> pooled = std::span<T>(blk.pool_out).subspan(b * pool_n, pool_n);
      maxpool1d_forward<T>(arch_.filters, bg.conv_len, arch_.pool_width, ws.act, pooled,
                           std::span<std::uint32_t>(blk.argmax).subspan(b * pool_n, pool_n));
      x = pooled;
    }
    dense_forward<T>(1, flatten_dim_, arch_.num_classes, x, tensor(dense), tensor(dense + 1),
                     std::span<T>(ws.logits).subspan(b * arch_.num_classes, arch_.num_classes));
  }
  ws.has_forward = true;
}

template <typename T>
void BasicNetwork<T>::backward(std::span<const T> grad_logits, Workspace<T>& ws, std::span<T> grads) const {
  if (!ws.has_forward) throw std::logic_error("backward called without a cached forward pass");
  if (grads.size() != params_.size()) throw ShapeError("backward: gradient buffer does not match parameters");
  const std::size_t batch = ws.batch;
  const std::size_t classes = arch_.num_classes;
  if (grad_logits.size() != batch * classes) throw ShapeError("backward: grad_logits shape mismatch");

  auto grad_tensor = [&](std::size_t i) { return grads.subspan(layout_[i].offset, layout_[i].size); };
  const T slope = static_cast<T>(arch_.leaky_slope);
  const std::size_t dense = 2 * blocks_.size();
  const std::size_t sample = arch_.input_channels * arch_.input_len;

  for (std::size_t b = 0; b < batch; ++b) {
    // ws.grad_a holds d/d(pool_out) of the current block.
    const std::size_t last_n = flatten_dim_;
    ws.grad_a.resize(last_n);
    dense_backward<T>(1, flatten_dim_, classes, std::span<const T>(ws.blocks.back().pool_out).subspan(b * last_n, last_n),
                      tensor(dense), grad_logits.subspan(b * classes, classes), ws.grad_a, grad_tensor(dense),
                      grad_tensor(dense + 1));
    for (std::size_t i = blocks_.size(); i-- > 0;) {
      const BlockGeometry& bg = blocks_[i];
      auto& blk = ws.blocks[i];
      const std::size_t conv_n = arch_.filters * bg.conv_len;
      const std::size_t pool_n = arch_.filters * bg.pool_len;
      ws.grad_b.resize(conv_n);
      maxpool1d_backward<T>(arch_.filters, bg.conv_len, arch_.pool_width, ws.grad_a,
                            std::span<const std::uint32_t>(blk.argmax).subspan(b * pool_n, pool_n), ws.grad_b);
      leaky_relu_backward<T>(std::span<const T>(blk.conv_out).subspan(b * conv_n, conv_n), ws.grad_b, ws.grad_b, slope);
      const Conv1dGeometry g{1, bg.in_channels, bg.in_len, arch_.filters, arch_.kernel_size, arch_.stride,
                             arch_.padding()};
      std::span<const T> x;
      std::span<T> gx;
      if (i == 0) {
        x = std::span<const T>(ws.input).subspan(b * sample, sample);
      } else {
        const std::size_t prev_n = arch_.filters * blocks_[i - 1].pool_len;
        x = std::span<const T>(ws.blocks[i - 1].pool_out).subspan(b * prev_n, prev_n);
        ws.grad_a.resize(g.input_size());
        gx = ws.grad_a;
      }
      conv1d_backward<T>(g, x, tensor(2 * i), ws.grad_b, gx, grad_tensor(2 * i), grad_tensor(2 * i + 1));
    }
  }
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;

}  // namespace fedprint::nn
