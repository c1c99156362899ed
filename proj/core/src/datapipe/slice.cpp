#include "fedprint/datapipe/slice.hpp"

#include <cmath>

namespace fedprint::datapipe {
namespace {

void standardize_columns(std::vector<float>& data) {
  const std::size_t n = data.size() / 2;
  for (std::size_t col = 0; col < 2; ++col) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data[2 * i + col];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = data[2 * i + col] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    const double inv = sd > 0.0 ? 1.0 / sd : 1.0;
    for (std::size_t i = 0; i < n; ++i) data[2 * i + col] = static_cast<float>((data[2 * i + col] - mean) * inv);
  }
}

}  // namespace

std::vector<SliceExample> slice_waveform(const signalgen::IQWaveform& wave, std::size_t window,
                                         std::uint64_t comm_id, const SliceOptions& options) {
  if (window < 1) throw signalgen::InvalidArgument("slice window must be >= 1");
  const std::size_t count = wave.samples.size() / window;
  std::vector<SliceExample> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    SliceExample ex;
    ex.label = wave.tag_id;
    ex.scenario_name = wave.scenario_name;
    ex.comm_id = comm_id;
    ex.data.resize(2 * window);
    for (std::size_t i = 0; i < window; ++i) {
      const auto& z = wave.samples[s * window + i];
      ex.data[2 * i] = static_cast<float>(z.real());
      ex.data[2 * i + 1] = static_cast<float>(z.imag());
    }
    if (options.standardize) standardize_columns(ex.data);
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace fedprint::datapipe
