#include "fedprint/signalgen/impairments.hpp"

#include <cmath>
#include <numbers>

namespace fedprint::signalgen {
namespace {

template <typename Range>
void check_finite(const Range& v, const char* stage) {
  for (const auto& x : v) {
    if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Complex>) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw NonFiniteStage(stage);
    } else {
      if (!std::isfinite(x)) throw NonFiniteStage(stage);
    }
  }
}

}  // namespace

IQWaveform apply_impairments(std::span<const double> baseband, const TagProfile& profile, double sample_rate_hz,
                             Rng& rng) {
  profile.validate();
  if (!(sample_rate_hz > 0.0)) throw InvalidArgument("sample rate must be positive");
  check_finite(baseband, "input");

  std::vector<double> x(baseband.begin(), baseband.end());

  if (profile.rise_time_samples > 0.0) {
    const double alpha = 1.0 / (1.0 + profile.rise_time_samples);
    double y = 0.0;
    for (double& v : x) {
      y += alpha * (v - y);
      v = y;
    }
  }
  check_finite(x, "edge_smoothing");

  const double c2 = profile.harmonic_coeffs.size() > 0 ? profile.harmonic_coeffs[0] : 0.0;
  const double c3 = profile.harmonic_coeffs.size() > 1 ? profile.harmonic_coeffs[1] : 0.0;
  if (c2 != 0.0 || c3 != 0.0) {
    for (double& v : x) v = v + c2 * v * v + c3 * v * v * v;
  }
  check_finite(x, "nonlinearity");

  IQWaveform out;
  out.sample_rate_hz = sample_rate_hz;
  out.tag_id = profile.tag_id;
  out.signal_len = x.size();
  out.samples.resize(x.size());

  const double w = 2.0 * std::numbers::pi * profile.cfo_hz / sample_rate_hz;
  for (std::size_t n = 0; n < x.size(); ++n) {
    out.samples[n] = profile.cfo_hz == 0.0 ? Complex(x[n], 0.0) : x[n] * std::polar(1.0, w * static_cast<double>(n));
  }
  check_finite(out.samples, "cfo");

  if (profile.phase_noise_std_rad > 0.0) {
    std::normal_distribution<double> step(0.0, profile.phase_noise_std_rad);
    double phi = 0.0;
    for (Complex& z : out.samples) {
      phi += step(rng);
      z *= std::polar(1.0, phi);
    }
  }
  check_finite(out.samples, "phase_noise");

  if (profile.iq_gain_imbalance != 1.0 || profile.iq_phase_imbalance_rad != 0.0) {
    const double c = std::cos(profile.iq_phase_imbalance_rad);
    const double s = std::sin(profile.iq_phase_imbalance_rad);
    for (Complex& z : out.samples) {
      const double i = z.real();
      const double q = z.imag();
      z = {profile.iq_gain_imbalance * i, q * c + i * s};
    }
  }
  check_finite(out.samples, "iq_imbalance");

  if (profile.dc_offset != Complex(0.0, 0.0)) {
    for (Complex& z : out.samples) z += profile.dc_offset;
  }
  check_finite(out.samples, "dc_offset");
  return out;
}

}  // namespace fedprint::signalgen
