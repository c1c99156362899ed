#include "fedprint/signalgen/rn16.hpp"

#include <cmath>

namespace fedprint::signalgen {

RN16Frame generate_rn16(Rng& rng, bool with_crc5) {
  RN16Frame frame;
  frame.with_crc5 = with_crc5;
  frame.payload_bits.resize(kPayloadBits);
  const std::uint64_t word = rng();
  for (std::size_t i = 0; i < kPayloadBits; ++i) frame.payload_bits[i] = ((word >> i) & 1U) != 0;
  return frame;
}

std::vector<bool> crc5(const std::vector<bool>& bits) {
  unsigned reg = 0b01001;
  for (bool b : bits) {
    const unsigned msb = (reg >> 4) & 1U;
    reg = (reg << 1) & 0x1FU;
    if ((msb ^ static_cast<unsigned>(b)) != 0) reg ^= 0b01001;
  }
  std::vector<bool> out(kCrc5Bits);
  for (std::size_t i = 0; i < kCrc5Bits; ++i) out[i] = ((reg >> (kCrc5Bits - 1 - i)) & 1U) != 0;
  return out;
}

std::size_t samples_per_bit(double sample_rate_hz, double blf_hz) {
  if (!(blf_hz > 0.0)) throw InvalidArgument("blf_hz must be positive");
  if (!(sample_rate_hz >= 2.0 * blf_hz)) {
    throw InvalidArgument("sample rate " + std::to_string(sample_rate_hz) + " Hz is below 2 x BLF (" +
                          std::to_string(2.0 * blf_hz) + " Hz)");
  }
  return static_cast<std::size_t>(std::llround(sample_rate_hz / blf_hz));
}

std::size_t encoded_bit_count(const RN16Frame& frame) {
  return kPreambleBits + frame.payload_bits.size() + (frame.with_crc5 ? kCrc5Bits : 0) + 1;
}

std::vector<double> fm0_encode(const RN16Frame& frame, double sample_rate_hz, std::size_t comm_len) {
  const std::size_t spb = samples_per_bit(sample_rate_hz, frame.blf_hz);
  const std::size_t mid = spb / 2;

  std::vector<PreambleSymbol> symbols(std::begin(kFm0Preamble), std::end(kFm0Preamble));
  auto push_bits = [&symbols](const std::vector<bool>& bits) {
    for (bool b : bits) symbols.push_back(b ? PreambleSymbol::one : PreambleSymbol::zero);
  };
  push_bits(frame.payload_bits);
  if (frame.with_crc5) push_bits(crc5(frame.payload_bits));
  symbols.push_back(PreambleSymbol::one);  // dummy

  std::vector<double> out(comm_len, 0.0);
  double level = -1.0;
  std::size_t pos = 0;
  for (PreambleSymbol s : symbols) {
    // The violation symbol skips the boundary inversion but keeps the
    // data-0 mid-bit inversion.
    if (s != PreambleSymbol::violation) level = -level;
    for (std::size_t i = 0; i < spb; ++i, ++pos) {
      if (i == mid && s != PreambleSymbol::one) level = -level;
      if (pos < comm_len) out[pos] = level;
    }
  }
  return out;
}

LinkTiming link_timing(double blf_hz) { return {10.0 / blf_hz, 1.0 / blf_hz}; }

}  // namespace fedprint::signalgen
