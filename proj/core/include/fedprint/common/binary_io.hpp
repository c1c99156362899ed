#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprint {

/// Thrown when a buffer ends before a field could be read. `offset` is the
/// byte position at which the read was attempted.
class TruncatedError : public std::runtime_error {
 public:
  TruncatedError(std::size_t offset, std::size_t wanted)
      : std::runtime_error("truncated input at byte offset " + std::to_string(offset) + " (needed " +
                           std::to_string(wanted) + " more bytes)"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Little-endian append-only encoder.
class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void put_u8(std::uint8_t v) { out_.push_back(v); }
  void put_u16(std::uint16_t v) { put_le(v); }
  void put_u32(std::uint32_t v) { put_le(v); }
  void put_u64(std::uint64_t v) { put_le(v); }
  void put_f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
  void put_f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }

  void put_f32s(std::span<const float> v) {
    if constexpr (std::endian::native == std::endian::little) {
      put_bytes(v.data(), v.size_bytes());
    } else {
      for (float x : v) put_f32(x);
    }
  }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  std::vector<std::uint8_t>& out_;
};

/// Little-endian bounds-checked decoder over a borrowed buffer.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in, std::size_t base_offset = 0)
      : in_(in), base_(base_offset) {}

  std::size_t position() const noexcept { return base_ + pos_; }
  std::size_t remaining() const noexcept { return in_.size() - pos_; }

  void get_bytes(void* dst, std::size_t n) {
    require(n);
    std::memcpy(dst, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t get_u8() { return get_le<std::uint8_t>(); }
  std::uint16_t get_u16() { return get_le<std::uint16_t>(); }
  std::uint32_t get_u32() { return get_le<std::uint32_t>(); }
  std::uint64_t get_u64() { return get_le<std::uint64_t>(); }
  float get_f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
  double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

  void get_f32s(std::span<float> dst) {
    require(dst.size_bytes());
    if constexpr (std::endian::native == std::endian::little) {
      std::memcpy(dst.data(), in_.data() + pos_, dst.size_bytes());
      pos_ += dst.size_bytes();
    } else {
      for (float& x : dst) x = get_f32();
    }
  }

 private:
  void require(std::size_t n) const {
    if (remaining() < n) throw TruncatedError(position(), n - remaining());
  }

  template <typename U>
  U get_le() {
    require(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace fedprint
