#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedprint/nn/layers.hpp"

namespace fedprint::nn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Optimizer moments for a flat parameter vector.
struct AdamState {
  std::vector<float> m;
  std::vector<float> v;
  std::uint64_t step = 0;
  AdamHyper hyper;

  void reset(std::size_t n) {
    m.assign(n, 0.0f);
    v.assign(n, 0.0f);
    step = 0;
  }
};

/// One bias-corrected Adam update at step `t` (t >= 1). Gradients are
/// checked for finiteness before anything is written.
template <typename T>
void adam_update(std::span<T> weights, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t t,
                 const AdamHyper& h) {
  detail::expect_size(grads.size(), weights.size(), "adam grads");
  detail::expect_size(m.size(), weights.size(), "adam first moment");
  detail::expect_size(v.size(), weights.size(), "adam second moment");
  if (t < 1) throw std::invalid_argument("adam step counter must be >= 1");
  for (const T g : grads) {
    if (!std::isfinite(static_cast<double>(g))) throw std::domain_error("adam: non-finite gradient");
  }
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    const double mi = h.beta1 * static_cast<double>(m[i]) + (1.0 - h.beta1) * g;
    const double vi = h.beta2 * static_cast<double>(v[i]) + (1.0 - h.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double m_hat = mi / bc1;
    const double v_hat = vi / bc2;
    weights[i] = static_cast<T>(static_cast<double>(weights[i]) - h.lr * m_hat / (std::sqrt(v_hat) + h.eps));
  }
}

/// Increments the step counter and applies adam_update to `weights`.
inline void adam_step(AdamState& state, std::span<float> weights, std::span<const float> grads) {
  if (state.m.size() != weights.size()) state.reset(weights.size());
  for (const float g : grads) {
    if (!std::isfinite(g)) throw std::domain_error("adam: non-finite gradient");
  }
  ++state.step;
  adam_update<float>(weights, grads, state.m, state.v, state.step, state.hyper);
}

}  // namespace fedprint::nn
