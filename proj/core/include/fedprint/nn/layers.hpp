#pragma once

// Layer kernels shared by the network (float) and the gradient checks
// (double). Tensors are dense, row-major, batch-first: [B][C][n].
// Backward kernels accumulate parameter gradients (+=) and overwrite input
// gradients.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fedprint/nn/arch.hpp"

namespace fedprint::nn {

namespace detail {

inline void expect_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(want) + " elements, got " +
                     std::to_string(got));
  }
}

template <typename T>
inline T dot(const T* a, const T* b, std::size_t n) {
  T acc = 0;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
inline void axpy(T alpha, const T* x, T* y, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace detail

struct Conv1dGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t in_len = 1;
  std::size_t filters = 1;
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;

  std::size_t out_len() const {
    if (in_len + 2 * padding < kernel) throw ShapeError("conv1d: padded input shorter than kernel");
    if (stride < 1) throw ShapeError("conv1d: stride must be >= 1");
    return 1 + (in_len + 2 * padding - kernel) / stride;
  }
  std::size_t input_size() const { return batch * in_channels * in_len; }
  std::size_t filter_size() const { return filters * in_channels * kernel; }
  std::size_t output_size() const { return batch * filters * out_len(); }

  /// Output positions i with 0 <= i*stride + tap - padding < in_len.
  void tap_range(std::size_t tap, std::size_t& lo, std::size_t& hi) const {
    const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(tap) - static_cast<std::ptrdiff_t>(padding);
    const auto s = static_cast<std::ptrdiff_t>(stride);
    const auto n = static_cast<std::ptrdiff_t>(in_len);
    std::ptrdiff_t first = off >= 0 ? 0 : (-off + s - 1) / s;
    std::ptrdiff_t last = (n - 1 - off) >= 0 ? (n - 1 - off) / s + 1 : 0;
    last = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(out_len()));
    lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(first, 0));
    hi = static_cast<std::size_t>(std::max<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(lo)));
  }
};

namespace detail {

/// Copies `rows` rows of length len into dst with `pad` zeros on both sides.
template <typename T>
void pad_rows(const T* src, std::size_t rows, std::size_t len, std::size_t pad, std::vector<T>& dst) {
  const std::size_t np = len + 2 * pad;
  dst.assign(rows * np, T(0));
  for (std::size_t r = 0; r < rows; ++r) std::copy(src + r * len, src + (r + 1) * len, dst.data() + r * np + pad);
}

inline constexpr std::size_t kLanes = 16;

/// out[o][t] += sum_i sum_tap w[o][i][tap] * in[i][t + tap] for OB rows from o0.
template <typename T, std::size_t OB>
void correlate_block(std::size_t o0, std::size_t n_in, std::size_t k, std::size_t len, const T* in,
                     std::size_t in_stride, const T* w, T* out, std::size_t out_stride) {
  std::size_t t0 = 0;
  for (; t0 + kLanes <= len; t0 += kLanes) {
    T acc[OB][kLanes];
    for (std::size_t ob = 0; ob < OB; ++ob) {
      for (std::size_t v = 0; v < kLanes; ++v) acc[ob][v] = out[(o0 + ob) * out_stride + t0 + v];
    }
    for (std::size_t i = 0; i < n_in; ++i) {
      const T* xi = in + i * in_stride + t0;
      for (std::size_t tap = 0; tap < k; ++tap) {
        const T* xv = xi + tap;
        for (std::size_t ob = 0; ob < OB; ++ob) {
          const T wv = w[((o0 + ob) * n_in + i) * k + tap];
#pragma omp simd
          for (std::size_t v = 0; v < kLanes; ++v) acc[ob][v] += wv * xv[v];
        }
      }
    }
    for (std::size_t ob = 0; ob < OB; ++ob) {
      for (std::size_t v = 0; v < kLanes; ++v) out[(o0 + ob) * out_stride + t0 + v] = acc[ob][v];
    }
  }
  for (std::size_t ob = 0; ob < OB; ++ob) {
    for (std::size_t t = t0; t < len; ++t) {
      T acc = out[(o0 + ob) * out_stride + t];
      for (std::size_t i = 0; i < n_in; ++i) {
        for (std::size_t tap = 0; tap < k; ++tap) acc += w[((o0 + ob) * n_in + i) * k + tap] * in[i * in_stride + t + tap];
      }
      out[(o0 + ob) * out_stride + t] = acc;
    }
  }
}

template <typename T>
void correlate(std::size_t n_out, std::size_t n_in, std::size_t k, std::size_t len, const T* in, std::size_t in_stride,
               const T* w, T* out, std::size_t out_stride) {
  std::size_t o = 0;
  for (; o + 4 <= n_out; o += 4) correlate_block<T, 4>(o, n_in, k, len, in, in_stride, w, out, out_stride);
  for (; o < n_out; ++o) correlate_block<T, 1>(o, n_in, k, len, in, in_stride, w, out, out_stride);
}

/// gw[o][i][tap] += sum_t go[o][t] * in[i][t + tap], k == 3, OB rows from o0.
template <typename T, std::size_t OB>
void weight_grad_block3(std::size_t o0, std::size_t n_in, std::size_t len, const T* go, const T* in,
                        std::size_t in_stride, T* gw) {
  for (std::size_t i = 0; i < n_in; ++i) {
    const T* x = in + i * in_stride;
    T acc[OB][3][kLanes] = {};
    std::size_t t0 = 0;
    for (; t0 + kLanes <= len; t0 += kLanes) {
      for (std::size_t ob = 0; ob < OB; ++ob) {
        const T* g = go + (o0 + ob) * len + t0;
#pragma omp simd
        for (std::size_t v = 0; v < kLanes; ++v) {
          acc[ob][0][v] += g[v] * x[t0 + v];
          acc[ob][1][v] += g[v] * x[t0 + v + 1];
          acc[ob][2][v] += g[v] * x[t0 + v + 2];
        }
      }
    }
    for (std::size_t ob = 0; ob < OB; ++ob) {
      for (std::size_t tap = 0; tap < 3; ++tap) {
        T sum = 0;
        for (std::size_t v = 0; v < kLanes; ++v) sum += acc[ob][tap][v];
        for (std::size_t t = t0; t < len; ++t) sum += go[(o0 + ob) * len + t] * x[t + tap];
        gw[((o0 + ob) * n_in + i) * 3 + tap] += sum;
      }
    }
  }
}

}  // namespace detail

/// Cross-correlation of the zero-padded input with each filter, plus bias.
template <typename T>
void conv1d_forward(const Conv1dGeometry& g, std::span<const T> input, std::span<const T> filters,
                    std::span<const T> bias, std::span<T> output) {
  const std::size_t n_out = g.out_len();
  detail::expect_size(input.size(), g.input_size(), "conv1d input");
  detail::expect_size(filters.size(), g.filter_size(), "conv1d filters (filters x in_channels x kernel)");
  detail::expect_size(bias.size(), g.filters, "conv1d bias");
  detail::expect_size(output.size(), g.output_size(), "conv1d output");

  const std::size_t np = g.in_len + 2 * g.padding;
  thread_local std::vector<T> xp;
  for (std::size_t b = 0; b < g.batch; ++b) {
    detail::pad_rows(input.data() + b * g.in_channels * g.in_len, g.in_channels, g.in_len, g.padding, xp);
    T* out = output.data() + b * g.filters * n_out;
    for (std::size_t f = 0; f < g.filters; ++f) std::fill(out + f * n_out, out + (f + 1) * n_out, bias[f]);
    if (g.stride == 1) {
      detail::correlate(g.filters, g.in_channels, g.kernel, n_out, xp.data(), np, filters.data(), out, n_out);
      continue;
    }
    for (std::size_t f = 0; f < g.filters; ++f) {
      for (std::size_t c = 0; c < g.in_channels; ++c) {
        const T* x = xp.data() + c * np;
        const T* w = filters.data() + (f * g.in_channels + c) * g.kernel;
        for (std::size_t tap = 0; tap < g.kernel; ++tap) {
          for (std::size_t i = 0; i < n_out; ++i) out[f * n_out + i] += w[tap] * x[i * g.stride + tap];
        }
      }
    }
  }
}

/// grad_input may be empty (first layer). grad_filters / grad_bias accumulate.
template <typename T>
void conv1d_backward(const Conv1dGeometry& g, std::span<const T> input, std::span<const T> filters,
                     std::span<const T> grad_output, std::span<T> grad_input, std::span<T> grad_filters,
                     std::span<T> grad_bias) {
  const std::size_t n_out = g.out_len();
  detail::expect_size(input.size(), g.input_size(), "conv1d input");
  detail::expect_size(filters.size(), g.filter_size(), "conv1d filters");
  detail::expect_size(grad_output.size(), g.output_size(), "conv1d grad_output");
  detail::expect_size(grad_filters.size(), g.filter_size(), "conv1d grad_filters");
  detail::expect_size(grad_bias.size(), g.filters, "conv1d grad_bias");
  const bool want_input = !grad_input.empty();
  if (want_input) detail::expect_size(grad_input.size(), g.input_size(), "conv1d grad_input");

  const std::size_t k = g.kernel;
  const std::size_t np = g.in_len + 2 * g.padding;
  const bool unit = g.stride == 1;
  const bool blocked = unit && k == 3;
  // Input gradient as a correlation of padded grad_output with flipped,
  // transposed filters: wt[c][f][k-1-tap] = w[f][c][tap].
  const std::size_t gpad = k - 1 >= g.padding ? k - 1 - g.padding : 0;
  const bool transposed = unit && want_input && k - 1 >= g.padding;
  thread_local std::vector<T> wt;
  if (transposed) {
    wt.resize(filters.size());
    for (std::size_t f = 0; f < g.filters; ++f) {
      for (std::size_t c = 0; c < g.in_channels; ++c) {
        for (std::size_t tap = 0; tap < k; ++tap) {
          wt[(c * g.filters + f) * k + (k - 1 - tap)] = filters[(f * g.in_channels + c) * k + tap];
        }
      }
    }
  }
  thread_local std::vector<T> xp;
  thread_local std::vector<T> gp;
  thread_local std::vector<T> gxp;
  for (std::size_t b = 0; b < g.batch; ++b) {
    detail::pad_rows(input.data() + b * g.in_channels * g.in_len, g.in_channels, g.in_len, g.padding, xp);
    const T* gob = grad_output.data() + b * g.filters * n_out;
    for (std::size_t f = 0; f < g.filters; ++f) {
      const T* go = gob + f * n_out;
      T bsum = 0;
#pragma omp simd reduction(+ : bsum)
      for (std::size_t i = 0; i < n_out; ++i) bsum += go[i];
      grad_bias[f] += bsum;
    }
    if (blocked) {
      std::size_t f = 0;
      for (; f + 4 <= g.filters; f += 4) {
        detail::weight_grad_block3<T, 4>(f, g.in_channels, n_out, gob, xp.data(), np, grad_filters.data());
      }
      for (; f < g.filters; ++f) {
        detail::weight_grad_block3<T, 1>(f, g.in_channels, n_out, gob, xp.data(), np, grad_filters.data());
      }
    } else {
      for (std::size_t f = 0; f < g.filters; ++f) {
        const T* go = gob + f * n_out;
        for (std::size_t c = 0; c < g.in_channels; ++c) {
          const T* x = xp.data() + c * np;
          for (std::size_t tap = 0; tap < k; ++tap) {
            T acc = 0;
            for (std::size_t i = 0; i < n_out; ++i) acc += go[i] * x[i * g.stride + tap];
            grad_filters[(f * g.in_channels + c) * k + tap] += acc;
          }
        }
      }
    }
    if (!want_input) continue;
    T* gx = grad_input.data() + b * g.in_channels * g.in_len;
    if (transposed) {
      detail::pad_rows(gob, g.filters, n_out, gpad, gp);
      std::fill(gx, gx + g.in_channels * g.in_len, T(0));
      detail::correlate(g.in_channels, g.filters, k, g.in_len, gp.data(), n_out + 2 * gpad, wt.data(), gx, g.in_len);
      continue;
    }
    gxp.assign(g.in_channels * np, T(0));
    for (std::size_t f = 0; f < g.filters; ++f) {
      const T* go = gob + f * n_out;
      for (std::size_t c = 0; c < g.in_channels; ++c) {
        const T* w = filters.data() + (f * g.in_channels + c) * k;
        T* row = gxp.data() + c * np;
        for (std::size_t tap = 0; tap < k; ++tap) {
          for (std::size_t i = 0; i < n_out; ++i) row[i * g.stride + tap] += w[tap] * go[i];
        }
      }
    }
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      std::copy(gxp.data() + c * np + g.padding, gxp.data() + c * np + g.padding + g.in_len, gx + c * g.in_len);
    }
  }
}

/// y = x for x >= 0, slope * x otherwise.
template <typename T>
void leaky_relu_forward(std::span<const T> x, std::span<T> y, T slope) {
  detail::expect_size(y.size(), x.size(), "leaky_relu output");
#pragma omp simd
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= T(0) ? x[i] : slope * x[i];
}

/// Derivative at exactly 0 is taken as 1.
template <typename T>
void leaky_relu_backward(std::span<const T> x, std::span<const T> grad_y, std::span<T> grad_x, T slope) {
  detail::expect_size(grad_y.size(), x.size(), "leaky_relu grad_y");
  detail::expect_size(grad_x.size(), x.size(), "leaky_relu grad_x");
#pragma omp simd
  for (std::size_t i = 0; i < x.size(); ++i) grad_x[i] = x[i] >= T(0) ? grad_y[i] : slope * grad_y[i];
}

/// Non-overlapping max over windows of `width` along the last axis of
/// `rows` rows of length n. A trailing partial window is dropped. Ties keep
/// the earliest index; `argmax` stores in-row positions.
template <typename T>
void maxpool1d_forward(std::size_t rows, std::size_t n, std::size_t width, std::span<const T> x, std::span<T> y,
                       std::span<std::uint32_t> argmax) {
  if (width < 1 || n < width) throw ShapeError("maxpool1d: row shorter than pool width");
  const std::size_t m = n / width;
  detail::expect_size(x.size(), rows * n, "maxpool1d input");
  detail::expect_size(y.size(), rows * m, "maxpool1d output");
  detail::expect_size(argmax.size(), rows * m, "maxpool1d argmax");
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * n;
    T* yr = y.data() + r * m;
    std::uint32_t* ar = argmax.data() + r * m;
    if (width == 2) {
      for (std::size_t j = 0; j < m; ++j) {
        const T a = xr[2 * j];
        const T b = xr[2 * j + 1];
        const bool second = b > a;
        yr[j] = second ? b : a;
        ar[j] = static_cast<std::uint32_t>(2 * j + (second ? 1 : 0));
      }
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      std::size_t best = j * width;
      for (std::size_t k = 1; k < width; ++k) {
        if (xr[j * width + k] > xr[best]) best = j * width + k;
      }
      yr[j] = xr[best];
      ar[j] = static_cast<std::uint32_t>(best);
    }
  }
}

template <typename T>
void maxpool1d_backward(std::size_t rows, std::size_t n, std::size_t width, std::span<const T> grad_y,
                        std::span<const std::uint32_t> argmax, std::span<T> grad_x) {
  const std::size_t m = n / width;
  detail::expect_size(grad_y.size(), rows * m, "maxpool1d grad_y");
  detail::expect_size(argmax.size(), rows * m, "maxpool1d argmax");
  detail::expect_size(grad_x.size(), rows * n, "maxpool1d grad_x");
  std::fill(grad_x.begin(), grad_x.end(), T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < m; ++j) grad_x[r * n + argmax[r * m + j]] += grad_y[r * m + j];
  }
}

/// y[b] = W x[b] + bias, W is [C x D].
template <typename T>
void dense_forward(std::size_t batch, std::size_t in_dim, std::size_t out_dim, std::span<const T> x,
                   std::span<const T> weight, std::span<const T> bias, std::span<T> y) {
  detail::expect_size(x.size(), batch * in_dim, "dense input");
  detail::expect_size(weight.size(), out_dim * in_dim, "dense weight");
  detail::expect_size(bias.size(), out_dim, "dense bias");
  detail::expect_size(y.size(), batch * out_dim, "dense output");
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < out_dim; ++c) {
      y[b * out_dim + c] = bias[c] + detail::dot(weight.data() + c * in_dim, x.data() + b * in_dim, in_dim);
    }
  }
}

/// grad_x may be empty. grad_weight / grad_bias accumulate.
template <typename T>
void dense_backward(std::size_t batch, std::size_t in_dim, std::size_t out_dim, std::span<const T> x,
                    std::span<const T> weight, std::span<const T> grad_y, std::span<T> grad_x,
                    std::span<T> grad_weight, std::span<T> grad_bias) {
  detail::expect_size(x.size(), batch * in_dim, "dense input");
  detail::expect_size(weight.size(), out_dim * in_dim, "dense weight");
  detail::expect_size(grad_y.size(), batch * out_dim, "dense grad_y");
  detail::expect_size(grad_weight.size(), out_dim * in_dim, "dense grad_weight");
  detail::expect_size(grad_bias.size(), out_dim, "dense grad_bias");
  const bool want_input = !grad_x.empty();
  if (want_input) {
    detail::expect_size(grad_x.size(), batch * in_dim, "dense grad_x");
    std::fill(grad_x.begin(), grad_x.end(), T(0));
  }
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xb = x.data() + b * in_dim;
    for (std::size_t c = 0; c < out_dim; ++c) {
      const T g = grad_y[b * out_dim + c];
      grad_bias[c] += g;
      detail::axpy(g, xb, grad_weight.data() + c * in_dim, in_dim);
      if (want_input) detail::axpy(g, weight.data() + c * in_dim, grad_x.data() + b * in_dim, in_dim);
    }
  }
}

/// Sum over rows of -score[label] + log(sum exp(score)), with max
/// subtraction. grad = (softmax - onehot) * grad_scale. Throws on
/// non-finite scores or labels outside [0, classes).
template <typename T>
double softmax_cross_entropy_sum(std::size_t batch, std::size_t classes, std::span<const T> scores,
                                 std::span<const std::uint32_t> labels, std::span<T> grad, double grad_scale) {
  detail::expect_size(scores.size(), batch * classes, "cross_entropy scores");
  detail::expect_size(labels.size(), batch, "cross_entropy labels");
  if (!grad.empty()) detail::expect_size(grad.size(), batch * classes, "cross_entropy grad");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(static_cast<double>(scores[i]))) throw std::domain_error("cross_entropy: non-finite score");
  }
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::uint32_t label = labels[b];
    if (label >= classes) throw std::out_of_range("cross_entropy: label " + std::to_string(label) + " out of range");
    const T* s = scores.data() + b * classes;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) mx = std::max(mx, static_cast<double>(s[c]));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(static_cast<double>(s[c]) - mx);
    const double lse = mx + std::log(z);
    total += lse - static_cast<double>(s[label]);
    if (!grad.empty()) {
      for (std::size_t c = 0; c < classes; ++c) {
        const double p = std::exp(static_cast<double>(s[c]) - lse);
        grad[b * classes + c] = static_cast<T>((p - (c == label ? 1.0 : 0.0)) * grad_scale);
      }
    }
  }
  return total;
}

/// Batch-mean cross entropy; grad is the gradient of the mean.
template <typename T>
double cross_entropy(std::size_t batch, std::size_t classes, std::span<const T> scores,
                     std::span<const std::uint32_t> labels, std::span<T> grad) {
  if (batch == 0) throw ShapeError("cross_entropy: empty batch");
  return softmax_cross_entropy_sum(batch, classes, scores, labels, grad, 1.0 / static_cast<double>(batch)) /
         static_cast<double>(batch);
}

}  // namespace fedprint::nn
