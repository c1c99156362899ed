#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprint::fedavg {

inline constexpr char kWireMagic[4] = {'F', 'P', 'F', 'L'};
inline constexpr std::uint16_t kWireVersion = 1;
/// magic(4) version(2) kind(1) round(4) reader(4) count(8) payload_len(8)
inline constexpr std::size_t kFrameHeaderSize = 31;
/// reader_id of server-to-client frames.
inline constexpr std::uint32_t kAllReaders = 0xFFFFFFFFu;
/// Upper bound on payload_len accepted from the wire.
inline constexpr std::uint64_t kMaxPayload = std::uint64_t{1} << 32;

enum class PayloadKind : std::uint8_t {
  weights = 1,
  bootstrap_weights = 2,
  start_round = 3,
  shutdown = 4,
};

std::string kind_name(PayloadKind kind);

class ProtocolError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, bad_version, bad_kind, bad_length, truncated, unexpected, bad_payload };
  ProtocolError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct Frame {
  PayloadKind kind = PayloadKind::weights;
  std::uint32_t round = 0;
  std::uint32_t reader_id = kAllReaders;
  std::uint64_t example_count = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct FrameHeader {
  PayloadKind kind = PayloadKind::weights;
  std::uint32_t round = 0;
  std::uint32_t reader_id = 0;
  std::uint64_t example_count = 0;
  std::uint64_t payload_len = 0;
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

/// Validates magic, version, kind and the payload length bound.
FrameHeader decode_header(std::span<const std::uint8_t> bytes);

/// Decodes exactly one frame; trailing or missing bytes are errors.
Frame decode_frame(std::span<const std::uint8_t> bytes);

constexpr std::size_t frame_size(std::size_t payload_len) { return kFrameHeaderSize + payload_len; }

}  // namespace fedprint::fedavg
