#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedprint/signalgen/types.hpp"

namespace fedprint::datapipe {

inline constexpr char kCorpusMagic[4] = {'F', 'P', 'R', 'N'};
inline constexpr std::uint16_t kCorpusVersion = 1;
inline constexpr std::size_t kCorpusHeaderBytes = 26;
inline constexpr const char* kManifestName = "manifest.json";

class CorpusError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, truncated, label_out_of_range, inconsistent };

  CorpusError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Provenance recorded in the directory manifest next to the data files.
struct CorpusMetadata {
  std::vector<signalgen::ChannelScenario> scenarios;
  std::uint64_t population_seed = 0;
  /// Labels in the corpus must be < num_tags. Zero means "max label + 1".
  std::uint32_t num_tags = 0;
  std::size_t comms_per_tag = 0;
};

/// Writes one FPRN file per (tag, scenario) plus manifest.json. Waves sharing
/// a file must have the same length and sample rate.
void write_corpus(const std::filesystem::path& dir, std::span<const signalgen::IQWaveform> waves,
                  const CorpusMetadata& meta = {});

/// Reads every file listed in the manifest, in manifest order.
std::vector<signalgen::IQWaveform> read_corpus(const std::filesystem::path& dir);

CorpusMetadata read_corpus_metadata(const std::filesystem::path& dir);

/// Encodes/decodes a single FPRN file image.
std::vector<std::uint8_t> encode_corpus_file(std::uint32_t tag_id, double sample_rate_hz,
                                             std::span<const signalgen::IQWaveform> comms);
std::vector<signalgen::IQWaveform> decode_corpus_file(std::span<const std::uint8_t> bytes,
                                                      const std::string& scenario_name, std::uint32_t num_tags,
                                                      const std::string& source = "<memory>");

}  // namespace fedprint::datapipe
