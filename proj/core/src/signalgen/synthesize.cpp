#include "fedprint/signalgen/synthesize.hpp"

#include <algorithm>
#include <exception>
#include <unordered_set>

#include "fedprint/common/rng.hpp"
#include "fedprint/signalgen/channel.hpp"
#include "fedprint/signalgen/impairments.hpp"
#include "fedprint/signalgen/rn16.hpp"

namespace fedprint::signalgen {
namespace {

enum Stream : std::uint64_t { kPayload = 1, kImpairment = 2, kChannel = 3 };

double to_f32_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

IQWaveform synthesize_communication(const TagProfile& profile, const ChannelScenario& scenario,
                                    std::size_t comm_index, const SynthesisOptions& options) {
  Rng payload_rng = make_rng(scenario.seed, {profile.tag_id, comm_index, kPayload, options.payload_salt});
  Rng impairment_rng = make_rng(scenario.seed, {profile.tag_id, comm_index, kImpairment});
  Rng channel_rng = make_rng(scenario.seed, {profile.tag_id, comm_index, kChannel});

  const RN16Frame frame = generate_rn16(payload_rng, options.with_crc5);
  const std::vector<double> baseband = fm0_encode(frame, options.sample_rate_hz, options.comm_len);
  IQWaveform wave = apply_impairments(baseband, profile, options.sample_rate_hz, impairment_rng);
  wave.signal_len =
      std::min(options.comm_len, encoded_bit_count(frame) * samples_per_bit(options.sample_rate_hz, frame.blf_hz));
  wave = apply_channel(wave, scenario, channel_rng);
  for (Complex& z : wave.samples) z = {to_f32_precision(z.real()), to_f32_precision(z.imag())};
  return wave;
}

std::vector<IQWaveform> synthesize_scenario(std::span<const TagProfile> profiles, const ChannelScenario& scenario,
                                            std::size_t comms_per_tag, const SynthesisOptions& options) {
  if (profiles.empty()) throw InvalidArgument("synthesize_scenario: no tag profiles");
  if (comms_per_tag < 1) throw InvalidArgument("synthesize_scenario: comms_per_tag must be >= 1");
  std::unordered_set<std::uint32_t> seen;
  for (const TagProfile& p : profiles) {
    if (!seen.insert(p.tag_id).second) {
      throw InvalidArgument("synthesize_scenario: duplicate tag_id " + std::to_string(p.tag_id));
    }
    p.validate();
  }
  scenario.validate();

  std::vector<IQWaveform> out(profiles.size() * comms_per_tag);
  const auto total = static_cast<std::ptrdiff_t>(out.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < total; ++i) {
    const std::size_t t = static_cast<std::size_t>(i) / comms_per_tag;
    const std::size_t c = static_cast<std::size_t>(i) % comms_per_tag;
    try {
      out[static_cast<std::size_t>(i)] = synthesize_communication(profiles[t], scenario, c, options);
    } catch (...) {
#pragma omp critical(fedprint_synth_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace fedprint::signalgen
