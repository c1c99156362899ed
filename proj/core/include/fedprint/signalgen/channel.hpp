#pragma once

#include "fedprint/common/rng.hpp"
#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

/// Linear amplitude factor of distance and obstacle losses.
double channel_gain(const ChannelScenario& scenario);

/// Mean |x|^2 over the first `signal_len` samples (or all, if zero).
double signal_power(const IQWaveform& wave);

/// Path loss, tissue attenuation, interferer tones, then AWGN at
/// `scenario.snr_db` relative to the attenuated signal power.
IQWaveform apply_channel(const IQWaveform& wave, const ChannelScenario& scenario, Rng& rng);

}  // namespace fedprint::signalgen
