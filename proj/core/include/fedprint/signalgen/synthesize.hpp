#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

struct SynthesisOptions {
  double sample_rate_hz = kDefaultSampleRateHz;
  std::size_t comm_len = kDefaultCommLength;
  bool with_crc5 = false;
  /// Mixed into the payload substream only. Changing it resamples every RN16
  /// while keeping impairment and channel noise realizations fixed.
  std::uint64_t payload_salt = 0;
};

/// One communication: RN16 -> FM0 -> impairments -> channel. Samples are
/// rounded to float32 precision so the on-disk format is lossless.
IQWaveform synthesize_communication(const TagProfile& profile, const ChannelScenario& scenario,
                                    std::size_t comm_index, const SynthesisOptions& options = {});

/// `comms_per_tag` communications for every profile, tag-major order.
/// Deterministic in (scenario.seed, profiles, options).
std::vector<IQWaveform> synthesize_scenario(std::span<const TagProfile> profiles, const ChannelScenario& scenario,
                                            std::size_t comms_per_tag, const SynthesisOptions& options = {});

}  // namespace fedprint::signalgen
