#include "fedprint/signalgen/profile.hpp"

#include <cmath>

#include "fedprint/common/rng.hpp"

namespace fedprint::signalgen {

void TagProfile::validate() const {
  if (!(iq_gain_imbalance > 0.0)) throw InvalidArgument("iq_gain_imbalance must be > 0");
  if (!(phase_noise_std_rad >= 0.0)) throw InvalidArgument("phase_noise_std_rad must be >= 0");
  if (!(rise_time_samples >= 0.0)) throw InvalidArgument("rise_time_samples must be >= 0");
  if (harmonic_coeffs.size() > 2) throw InvalidArgument("at most two harmonic coefficients (c2, c3)");
  const bool finite = std::isfinite(cfo_hz) && std::isfinite(iq_gain_imbalance) &&
                      std::isfinite(iq_phase_imbalance_rad) && std::isfinite(dc_offset.real()) &&
                      std::isfinite(dc_offset.imag()) && std::isfinite(phase_noise_std_rad) &&
                      std::isfinite(rise_time_samples);
  if (!finite) throw InvalidArgument("tag profile has non-finite fields");
  for (double c : harmonic_coeffs) {
    if (!std::isfinite(c)) throw InvalidArgument("tag profile has non-finite harmonic coefficient");
  }
}

std::vector<TagProfile> generate_population(std::size_t count, std::uint64_t seed, const ImpairmentRanges& r) {
  std::vector<TagProfile> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    Rng rng = make_rng(seed, {hash_string("tag-profile"), t});
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    TagProfile p;
    p.tag_id = static_cast<std::uint32_t>(t);
    p.cfo_hz = uniform(-r.cfo_max_hz, r.cfo_max_hz);
    p.iq_gain_imbalance = uniform(r.gain_min, r.gain_max);
    p.iq_phase_imbalance_rad = uniform(-r.phase_imbalance_max_rad, r.phase_imbalance_max_rad);
    p.dc_offset = {uniform(-r.dc_offset_max, r.dc_offset_max), uniform(-r.dc_offset_max, r.dc_offset_max)};
    p.phase_noise_std_rad = uniform(0.0, r.phase_noise_max_rad);
    p.harmonic_coeffs = {uniform(-r.harmonic_max, r.harmonic_max), uniform(-r.harmonic_max, r.harmonic_max)};
    p.rise_time_samples = uniform(0.0, r.rise_time_max_samples);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace fedprint::signalgen
