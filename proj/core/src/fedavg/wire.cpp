#include "fedprint/fedavg/wire.hpp"

#include <algorithm>

#include "fedprint/common/binary_io.hpp"

namespace fedprint::fedavg {

std::string kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::weights:
      return "weights";
    case PayloadKind::bootstrap_weights:
      return "bootstrap_weights";
    case PayloadKind::start_round:
      return "start_round";
    case PayloadKind::shutdown:
      return "shutdown";
  }
  return "kind#" + std::to_string(static_cast<int>(kind));
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(frame_size(frame.payload.size()));
  ByteWriter w(out);
  w.put_bytes(kWireMagic, 4);
  w.put_u16(kWireVersion);
  w.put_u8(static_cast<std::uint8_t>(frame.kind));
  w.put_u32(frame.round);
  w.put_u32(frame.reader_id);
  w.put_u64(frame.example_count);
  w.put_u64(frame.payload.size());
  w.put_bytes(frame.payload.data(), frame.payload.size());
  return out;
}

FrameHeader decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderSize) {
    throw ProtocolError(ProtocolError::Kind::truncated,
                        "frame header needs " + std::to_string(kFrameHeaderSize) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  if (!std::equal(kWireMagic, kWireMagic + 4, bytes.begin())) {
    throw ProtocolError(ProtocolError::Kind::bad_magic, "bad frame magic");
  }
  ByteReader r(bytes.subspan(4, kFrameHeaderSize - 4), 4);
  const std::uint16_t version = r.get_u16();
  if (version != kWireVersion) {
    throw ProtocolError(ProtocolError::Kind::bad_version, "unsupported protocol version " + std::to_string(version) +
                                                              " (expected " + std::to_string(kWireVersion) + ")");
  }
  const std::uint8_t kind = r.get_u8();
  if (kind < 1 || kind > 4) {
    throw ProtocolError(ProtocolError::Kind::bad_kind, "unknown payload kind " + std::to_string(kind));
  }
  FrameHeader h;
  h.kind = static_cast<PayloadKind>(kind);
  h.round = r.get_u32();
  h.reader_id = r.get_u32();
  h.example_count = r.get_u64();
  h.payload_len = r.get_u64();
  if (h.payload_len > kMaxPayload) {
    throw ProtocolError(ProtocolError::Kind::bad_length, "payload length " + std::to_string(h.payload_len) +
                                                             " exceeds limit");
  }
  return h;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  const FrameHeader h = decode_header(bytes);
  const std::size_t want = frame_size(h.payload_len);
  if (bytes.size() < want) {
    throw ProtocolError(ProtocolError::Kind::truncated, "frame declares " + std::to_string(h.payload_len) +
                                                            " payload bytes, only " +
                                                            std::to_string(bytes.size() - kFrameHeaderSize) +
                                                            " present");
  }
  if (bytes.size() > want) {
    throw ProtocolError(ProtocolError::Kind::bad_length,
                        std::to_string(bytes.size() - want) + " trailing bytes after frame");
  }
  Frame f;
  f.kind = h.kind;
  f.round = h.round;
  f.reader_id = h.reader_id;
  f.example_count = h.example_count;
  f.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
  return f;
}

}  // namespace fedprint::fedavg
