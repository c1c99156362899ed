#include "fedprint/datapipe/corpus_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fedprint/common/binary_io.hpp"
#include "fedprint/signalgen/rn16.hpp"
#include "fedprint/signalgen/scenario.hpp"

namespace fedprint::datapipe {
namespace fs = std::filesystem;
using nlohmann::json;
using signalgen::IQWaveform;

namespace {

std::string file_name_for(const std::string& scenario, std::uint32_t tag) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "__tag%05u.fprn", tag);
  return (scenario.empty() ? std::string("UNNAMED") : scenario) + buf;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError(CorpusError::Kind::io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::uint8_t> encode_corpus_file(std::uint32_t tag_id, double sample_rate_hz,
                                             std::span<const IQWaveform> comms) {
  const std::size_t len = comms.empty() ? 0 : comms.front().samples.size();
  std::vector<std::uint8_t> out;
  out.reserve(kCorpusHeaderBytes + comms.size() * len * 8);
  ByteWriter w(out);
  w.put_bytes(kCorpusMagic, 4);
  w.put_u16(kCorpusVersion);
  w.put_u32(tag_id);
  w.put_f64(sample_rate_hz);
  w.put_u32(static_cast<std::uint32_t>(comms.size()));
  w.put_u32(static_cast<std::uint32_t>(len));
  std::vector<float> row(2 * len);
  for (const IQWaveform& c : comms) {
    if (c.samples.size() != len) {
      throw CorpusError(CorpusError::Kind::inconsistent, "communications in one file must share a length");
    }
    for (std::size_t i = 0; i < len; ++i) {
      row[2 * i] = static_cast<float>(c.samples[i].real());
      row[2 * i + 1] = static_cast<float>(c.samples[i].imag());
    }
    w.put_f32s(row);
  }
  return out;
}

std::vector<IQWaveform> decode_corpus_file(std::span<const std::uint8_t> bytes, const std::string& scenario_name,
                                           std::uint32_t num_tags, const std::string& source) {
  ByteReader r(bytes);
  std::uint32_t tag = 0;
  double fs_hz = 0.0;
  std::uint32_t count = 0;
  std::uint32_t len = 0;
  try {
    char magic[4];
    r.get_bytes(magic, 4);
    if (std::memcmp(magic, kCorpusMagic, 4) != 0) {
      throw CorpusError(CorpusError::Kind::bad_magic, source + ": bad magic (expected FPRN)");
    }
    const std::uint16_t version = r.get_u16();
    if (version != kCorpusVersion) {
      throw CorpusError(CorpusError::Kind::bad_version,
                        source + ": unsupported version " + std::to_string(version));
    }
    tag = r.get_u32();
    fs_hz = r.get_f64();
    count = r.get_u32();
    len = r.get_u32();
  } catch (const TruncatedError& e) {
    throw CorpusError(CorpusError::Kind::truncated, source + ": header " + e.what());
  }
  if (num_tags != 0 && tag >= num_tags) {
    throw CorpusError(CorpusError::Kind::label_out_of_range, source + ": tag id " + std::to_string(tag) +
                                                                 " out of range (num_tags " +
                                                                 std::to_string(num_tags) + ")");
  }

  std::vector<IQWaveform> out;
  if (count > 0 && 8 * static_cast<std::uint64_t>(len) > r.remaining()) {
    throw CorpusError(CorpusError::Kind::truncated,
                      source + ": record 0 " + TruncatedError(r.position(), 8 * std::size_t{len} - r.remaining()).what());
  }
  std::vector<float> row(2 * static_cast<std::size_t>(len));
  for (std::uint32_t c = 0; c < count; ++c) {
    try {
      r.get_f32s(row);
    } catch (const TruncatedError& e) {
      throw CorpusError(CorpusError::Kind::truncated, source + ": record " + std::to_string(c) + " " + e.what());
    }
    IQWaveform& w = out.emplace_back();
    w.tag_id = tag;
    w.sample_rate_hz = fs_hz;
    w.scenario_name = scenario_name;
    w.signal_len = len;
    w.samples.resize(len);
    for (std::size_t i = 0; i < len; ++i) w.samples[i] = {row[2 * i], row[2 * i + 1]};
  }
  if (r.remaining() != 0) {
    throw CorpusError(CorpusError::Kind::inconsistent,
                      source + ": " + std::to_string(r.remaining()) + " trailing bytes at offset " +
                          std::to_string(r.position()));
  }
  return out;
}

void write_corpus(const fs::path& dir, std::span<const IQWaveform> waves, const CorpusMetadata& meta) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CorpusError(CorpusError::Kind::io, "cannot create " + dir.string() + ": " + ec.message());

  // Group by (scenario, tag) in order of first appearance.
  std::vector<std::pair<std::string, std::uint32_t>> order;
  std::map<std::pair<std::string, std::uint32_t>, std::vector<IQWaveform>> groups;
  std::uint32_t max_label = 0;
  for (const IQWaveform& w : waves) {
    auto key = std::make_pair(w.scenario_name, w.tag_id);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(w);
    max_label = std::max(max_label, w.tag_id);
  }
  const std::uint32_t num_tags = meta.num_tags != 0 ? meta.num_tags : (waves.empty() ? 0 : max_label + 1);
  if (meta.num_tags != 0 && !waves.empty() && max_label >= meta.num_tags) {
    throw CorpusError(CorpusError::Kind::label_out_of_range, "label " + std::to_string(max_label) +
                                                                 " exceeds num_tags " +
                                                                 std::to_string(meta.num_tags));
  }

  json files = json::array();
  for (const auto& key : order) {
    const auto& comms = groups.at(key);
    const std::string name = file_name_for(key.first, key.second);
    const auto bytes = encode_corpus_file(key.second, comms.front().sample_rate_hz, comms);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError(CorpusError::Kind::io, "cannot write " + (dir / name).string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    files.push_back({{"file", name},
                     {"tag_id", key.second},
                     {"scenario", key.first},
                     {"comm_count", comms.size()},
                     {"comm_len", comms.front().samples.size()}});
  }

  json scenarios = json::array();
  for (const auto& s : meta.scenarios) {
    json sj = json::parse(signalgen::scenario_to_json(s));
    const auto timing = signalgen::link_timing(signalgen::kDefaultBlfHz);
    sj["link"] = {{"blf_hz", signalgen::kDefaultBlfHz}, {"t1_s", timing.t1_s}, {"t2_s", timing.t2_s}};
    scenarios.push_back(sj);
  }
  json manifest = {{"format", "FPRN"},
                   {"version", kCorpusVersion},
                   {"num_tags", num_tags},
                   {"comms_per_tag", meta.comms_per_tag},
                   {"seeds", {{"population", meta.population_seed}}},
                   {"scenarios", scenarios},
                   {"files", files}};
  std::ofstream out(dir / kManifestName, std::ios::trunc);
  if (!out) throw CorpusError(CorpusError::Kind::io, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

namespace {

json read_manifest(const fs::path& dir) {
  const auto bytes = read_file(dir / kManifestName);
  try {
    json m = json::parse(bytes.begin(), bytes.end());
    if (m.value("format", "") != "FPRN") {
      throw CorpusError(CorpusError::Kind::bad_magic, (dir / kManifestName).string() + ": not an FPRN manifest");
    }
    if (m.value("version", 0) != kCorpusVersion) {
      throw CorpusError(CorpusError::Kind::bad_version, (dir / kManifestName).string() + ": unsupported version");
    }
    return m;
  } catch (const json::exception& e) {
    throw CorpusError(CorpusError::Kind::inconsistent, (dir / kManifestName).string() + ": " + e.what());
  }
}

}  // namespace

CorpusMetadata read_corpus_metadata(const fs::path& dir) {
  const json m = read_manifest(dir);
  CorpusMetadata meta;
  meta.num_tags = m.value("num_tags", 0U);
  meta.comms_per_tag = m.value("comms_per_tag", std::size_t{0});
  meta.population_seed = m.at("seeds").value("population", std::uint64_t{0});
  for (const json& s : m.value("scenarios", json::array())) {
    json copy = s;
    copy.erase("link");
    meta.scenarios.push_back(signalgen::scenario_from_json(copy.dump()));
  }
  return meta;
}

std::vector<IQWaveform> read_corpus(const fs::path& dir) {
  const json m = read_manifest(dir);
  const auto num_tags = m.value("num_tags", 0U);
  std::vector<IQWaveform> out;
  for (const json& f : m.at("files")) {
    const std::string name = f.at("file").get<std::string>();
    const auto bytes = read_file(dir / name);
    auto comms = decode_corpus_file(bytes, f.at("scenario").get<std::string>(), num_tags, (dir / name).string());
    if (!comms.empty() && comms.front().tag_id != f.at("tag_id").get<std::uint32_t>()) {
      throw CorpusError(CorpusError::Kind::inconsistent, (dir / name).string() + ": tag id differs from manifest");
    }
    std::move(comms.begin(), comms.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace fedprint::datapipe
