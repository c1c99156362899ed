#pragma once

#include <cstddef>
#include <vector>

#include "fedprint/common/rng.hpp"
#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

/// FM0 preamble symbols with TRext = 0. `kViolation` marks the "v" symbol.
enum class PreambleSymbol { zero, one, violation };
inline constexpr PreambleSymbol kFm0Preamble[] = {PreambleSymbol::one,  PreambleSymbol::zero,
                                                  PreambleSymbol::one,  PreambleSymbol::zero,
                                                  PreambleSymbol::violation, PreambleSymbol::one};
inline constexpr std::size_t kPreambleBits = 6;
inline constexpr std::size_t kPayloadBits = 16;
inline constexpr std::size_t kCrc5Bits = 5;

RN16Frame generate_rn16(Rng& rng, bool with_crc5 = false);

/// Gen2 CRC-5 (x^5 + x^3 + 1, preset 01001) over `bits`, MSB first.
std::vector<bool> crc5(const std::vector<bool>& bits);

/// Number of baseband samples in one FM0 bit.
std::size_t samples_per_bit(double sample_rate_hz, double blf_hz);

/// Number of encoded bits: preamble + payload (+ CRC-5) + dummy 1.
std::size_t encoded_bit_count(const RN16Frame& frame);

/// FM0 line code at +/-1 levels, zero padded or truncated to `comm_len`.
/// Throws InvalidArgument when sample_rate_hz < 2 * blf_hz.
std::vector<double> fm0_encode(const RN16Frame& frame, double sample_rate_hz,
                               std::size_t comm_len = kDefaultCommLength);

/// Tag reply / reader turnaround times for link rate R = blf_hz.
struct LinkTiming {
  double t1_s;
  double t2_s;
};
LinkTiming link_timing(double blf_hz);

}  // namespace fedprint::signalgen
