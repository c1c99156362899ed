#include "fedprint/signalgen/channel.hpp"

#include <cmath>
#include <numbers>

namespace fedprint::signalgen {

double channel_gain(const ChannelScenario& scenario) {
  return (kReferenceDistanceCm / scenario.distance_cm) * std::pow(10.0, -scenario.obstacle.attenuation_db() / 20.0);
}

double signal_power(const IQWaveform& wave) {
  const std::size_t n = wave.signal_len == 0 ? wave.samples.size() : std::min(wave.signal_len, wave.samples.size());
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(wave.samples[i]);
  return acc / static_cast<double>(n);
}

IQWaveform apply_channel(const IQWaveform& wave, const ChannelScenario& scenario, Rng& rng) {
  scenario.validate();
  IQWaveform out = wave;
  out.scenario_name = scenario.name;

  const double gain = channel_gain(scenario);
  if (gain != 1.0) {
    for (Complex& z : out.samples) z *= gain;
  }

  const bool noisy = std::isfinite(scenario.snr_db);
  if (!noisy && scenario.interferers.empty()) return out;

  const double power = signal_power(out);
  if (!(power > 0.0)) throw InvalidArgument("cannot apply SNR or interferer power to an all-zero signal");

  const double two_pi = 2.0 * std::numbers::pi;
  std::uniform_real_distribution<double> phase0(0.0, two_pi);
  for (const Interferer& tone : scenario.interferers) {
    const double amp = std::sqrt(power * std::pow(10.0, tone.relative_power_db / 10.0));
    const double w = two_pi * tone.freq_hz / out.sample_rate_hz;
    const double p0 = phase0(rng);
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
      out.samples[n] += std::polar(amp, w * static_cast<double>(n) + p0);
    }
  }

  if (noisy) {
    const double sigma = std::sqrt(power / std::pow(10.0, scenario.snr_db / 10.0) / 2.0);
    std::normal_distribution<double> noise(0.0, sigma);
    for (Complex& z : out.samples) {
      const double re = noise(rng);
      const double im = noise(rng);
      z += Complex(re, im);
    }
  }
  return out;
}

}  // namespace fedprint::signalgen
