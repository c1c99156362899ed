#include "fedprint/nn/model.hpp"

#include <exception>

#include "fedprint/nn/checkpoint.hpp"
#include "fedprint/nn/layers.hpp"

namespace fedprint::nn {
namespace {

std::size_t chunk_count(std::size_t batch) { return (batch + Model::kChunkSize - 1) / Model::kChunkSize; }

template <typename Fn>
void for_each_chunk(std::size_t chunks, Fn&& fn) {
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    try {
      fn(static_cast<std::size_t>(c));
    } catch (...) {
#pragma omp critical(fedprint_chunk_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

Model::Model(const ArchConfig& arch, std::uint64_t init_seed) : net_(arch) {
  Rng rng = make_rng(init_seed, {hash_string("glorot-init")});
  net_.init_glorot(rng);
  adam_.reset(net_.parameters().size());
}

Model::Model(const ArchConfig& arch, std::span<const float> params) : net_(arch) {
  net_.set_parameters(params);
  adam_.reset(net_.parameters().size());
}

double Model::loss_and_gradient(std::span<const float> inputs, std::span<const std::uint32_t> labels,
                                std::vector<float>& grad) const {
  const std::size_t batch = labels.size();
  if (batch == 0) throw ShapeError("empty batch");
  const std::size_t sample = static_cast<std::size_t>(arch().input_channels) * arch().input_len;
  if (inputs.size() != batch * sample) throw ShapeError("batch inputs do not match labels x input size");
  const std::size_t classes = arch().num_classes;
  const std::size_t n_params = net_.parameters().size();
  const std::size_t chunks = chunk_count(batch);

  scratch_.ensure(chunks);
  auto& ws = scratch_.ws;
  auto& grads = scratch_.grads;
  std::vector<double> losses(chunks, 0.0);
  for_each_chunk(chunks, [&](std::size_t c) {
    const std::size_t b0 = c * kChunkSize;
    const std::size_t nb = std::min(kChunkSize, batch - b0);
    net_.forward(inputs.subspan(b0 * sample, nb * sample), nb, ws[c]);
    std::vector<float>& glog = scratch_.grad_logits[c];
    glog.resize(nb * classes);
    losses[c] = softmax_cross_entropy_sum<float>(nb, classes, ws[c].logits, labels.subspan(b0, nb), glog,
                                                 1.0 / static_cast<double>(batch));
    grads[c].assign(n_params, 0.0f);
    net_.backward(glog, ws[c], grads[c]);
  });

  grad.assign(n_params, 0.0f);
  double total = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    total += losses[c];
    const float* g = grads[c].data();
#pragma omp simd
    for (std::size_t i = 0; i < n_params; ++i) grad[i] += g[i];
  }
  return total / static_cast<double>(batch);
}

double Model::train_batch(std::span<const float> inputs, std::span<const std::uint32_t> labels) {
  std::vector<float> grad;
  const double loss = loss_and_gradient(inputs, labels, grad);
  adam_step(adam_, net_.parameters(), grad);
  return loss;
}

void Model::predict(std::span<const float> inputs, std::size_t batch, std::span<std::uint32_t> out) const {
  if (out.size() != batch) throw ShapeError("predict: output size mismatch");
  const std::size_t sample = static_cast<std::size_t>(arch().input_channels) * arch().input_len;
  if (inputs.size() != batch * sample) throw ShapeError("predict: input size mismatch");
  const std::size_t classes = arch().num_classes;
  const std::size_t chunks = chunk_count(batch);
  scratch_.ensure(chunks);
  auto& ws = scratch_.ws;
  for_each_chunk(chunks, [&](std::size_t c) {
    const std::size_t b0 = c * kChunkSize;
    const std::size_t nb = std::min(kChunkSize, batch - b0);
    net_.forward(inputs.subspan(b0 * sample, nb * sample), nb, ws[c]);
    for (std::size_t b = 0; b < nb; ++b) {
      const float* row = ws[c].logits.data() + b * classes;
      std::uint32_t best = 0;
      for (std::uint32_t k = 1; k < classes; ++k) {
        if (row[k] > row[best]) best = k;
      }
      out[b0 + b] = best;
    }
  });
}

double Model::loss(std::span<const float> inputs, std::span<const std::uint32_t> labels) const {
  const std::size_t batch = labels.size();
  const std::size_t sample = static_cast<std::size_t>(arch().input_channels) * arch().input_len;
  if (batch == 0 || inputs.size() != batch * sample) throw ShapeError("loss: batch shape mismatch");
  Workspace<float> ws;
  net_.forward(inputs, batch, ws);
  return cross_entropy<float>(batch, arch().num_classes, ws.logits, labels, {});
}

std::vector<std::uint8_t> Model::checkpoint_bytes() const { return encode_checkpoint(arch(), parameters()); }

}  // namespace fedprint::nn
