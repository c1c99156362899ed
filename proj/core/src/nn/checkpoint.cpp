#include "fedprint/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "fedprint/common/binary_io.hpp"

namespace fedprint::nn {

std::size_t checkpoint_size(const ArchConfig& arch) {
  std::size_t n = 4 + 2 + 6 * 4 + 8 + 2 * 4 + 4;
  for (const TensorSpec& t : parameter_layout(arch)) n += 4 + 4 * t.shape.size() + 4 * t.size;
  return n;
}

std::vector<std::uint8_t> encode_checkpoint(const ArchConfig& arch, std::span<const float> params) {
  const auto layout = parameter_layout(arch);
  if (params.size() != parameter_count(arch)) throw CheckpointError("parameter count does not match architecture");
  std::vector<std::uint8_t> out;
  out.reserve(checkpoint_size(arch));
  ByteWriter w(out);
  w.put_bytes(kCheckpointMagic, 4);
  w.put_u16(kCheckpointVersion);
  w.put_u32(arch.num_conv_blocks);
  w.put_u32(arch.filters);
  w.put_u32(arch.kernel_size);
  w.put_u32(arch.input_len);
  w.put_u32(arch.input_channels);
  w.put_u32(arch.num_classes);
  w.put_f64(arch.leaky_slope);
  w.put_u32(arch.stride);
  w.put_u32(arch.pool_width);
  w.put_u32(static_cast<std::uint32_t>(layout.size()));
  for (const TensorSpec& t : layout) {
    w.put_u32(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.put_u32(static_cast<std::uint32_t>(d));
  }
  w.put_f32s(params);
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  Checkpoint ck;
  try {
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw CheckpointError("bad checkpoint magic (expected FPWT)");
    const std::uint16_t version = r.get_u16();
    if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    ArchConfig& a = ck.arch;
    a.num_conv_blocks = r.get_u32();
    a.filters = r.get_u32();
    a.kernel_size = r.get_u32();
    a.input_len = r.get_u32();
    a.input_channels = r.get_u32();
    a.num_classes = r.get_u32();
    a.leaky_slope = r.get_f64();
    a.stride = r.get_u32();
    a.pool_width = r.get_u32();
    try {
      a.validate();
    } catch (const ShapeError& e) {
      throw CheckpointError(std::string("checkpoint architecture invalid: ") + e.what());
    }
    const auto layout = parameter_layout(a);
    const std::uint32_t count = r.get_u32();
    if (count != layout.size()) throw CheckpointError("checkpoint tensor count does not match architecture");
    for (const TensorSpec& t : layout) {
      const std::uint32_t rank = r.get_u32();
      if (rank != t.shape.size()) throw CheckpointError("tensor " + t.name + " rank mismatch");
      for (std::size_t d : t.shape) {
        if (r.get_u32() != d) throw CheckpointError("tensor " + t.name + " shape mismatch");
      }
    }
    ck.params.resize(parameter_count(a));
    r.get_f32s(ck.params);
  } catch (const TruncatedError& e) {
    throw CheckpointError(std::string("checkpoint ") + e.what());
  }
  if (r.remaining() != 0) throw CheckpointError("checkpoint has trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ArchConfig& arch, std::span<const float> params) {
  const auto bytes = encode_checkpoint(arch, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return decode_checkpoint(bytes);
}

}  // namespace fedprint::nn
