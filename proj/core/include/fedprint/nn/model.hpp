#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedprint/nn/adam.hpp"
#include "fedprint/nn/arch.hpp"
#include "fedprint/nn/network.hpp"

namespace fedprint::nn {

/// Network weights plus Adam state. Single owner while training; const
/// members reuse internal scratch buffers, so one instance must not be used
/// from several threads at once.
///
/// A batch is split into fixed chunks of kChunkSize samples whose gradients
/// are computed independently (in parallel when OpenMP is available) and
/// summed in chunk order, so results do not depend on the thread count.
class Model {
 public:
  static constexpr std::size_t kChunkSize = 16;

  Model(const ArchConfig& arch, std::uint64_t init_seed);
  Model(const ArchConfig& arch, std::span<const float> params);

  Model(const Model& other) : net_(other.net_), adam_(other.adam_) {}
  Model& operator=(const Model& other) {
    net_ = other.net_;
    adam_ = other.adam_;
    return *this;
  }
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ArchConfig& arch() const noexcept { return net_.arch(); }
  const Network& network() const noexcept { return net_; }
  std::span<const float> parameters() const noexcept { return net_.parameters(); }
  /// Replaces the weights; optimizer moments are kept.
  void set_parameters(std::span<const float> params) { net_.set_parameters(params); }

  AdamState& optimizer() noexcept { return adam_; }
  const AdamState& optimizer() const noexcept { return adam_; }

  /// Forward + backward + one Adam step on a channels-first batch. Returns the
  /// batch-mean cross-entropy loss.
  double train_batch(std::span<const float> inputs, std::span<const std::uint32_t> labels);

  /// Gradient of the batch-mean loss without updating anything.
  double loss_and_gradient(std::span<const float> inputs, std::span<const std::uint32_t> labels,
                           std::vector<float>& grad) const;

  /// Argmax class per sample (ties resolve to the lowest class index).
  void predict(std::span<const float> inputs, std::size_t batch, std::span<std::uint32_t> out) const;

  /// Mean loss without gradients.
  double loss(std::span<const float> inputs, std::span<const std::uint32_t> labels) const;

  std::vector<std::uint8_t> checkpoint_bytes() const;

 private:
  struct Scratch {
    std::vector<Workspace<float>> ws;
    std::vector<std::vector<float>> grads;
    std::vector<std::vector<float>> grad_logits;
    void ensure(std::size_t chunks) {
      if (ws.size() < chunks) {
        ws.resize(chunks);
        grads.resize(chunks);
        grad_logits.resize(chunks);
      }
    }
  };

  Network net_;
  AdamState adam_;
  mutable Scratch scratch_;
};

}  // namespace fedprint::nn
