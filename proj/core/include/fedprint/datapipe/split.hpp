#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedprint/datapipe/slice.hpp"

namespace fedprint::datapipe {

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Communication indices assigned to each split.
struct CorpusPartition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

struct SplitDataset {
  std::vector<SliceExample> train;
  std::vector<SliceExample> validation;
  std::vector<SliceExample> test;
  double fraction_used = 1.0;
};

/// Per-tag stratified partition. Each tag's communications are shuffled with
/// a tag substream of `seed`, the first round(fraction * n) are kept, and
/// those are cut by `ratios`. Throws InvalidArgument naming the tag when a
/// tag has fewer than 10 communications or would get an empty test split.
CorpusPartition partition_corpus(std::span<const signalgen::IQWaveform> waves, const SplitRatios& ratios,
                                 double fraction, std::uint64_t seed);

/// partition_corpus followed by slicing every communication with `window`.
/// All slices of one communication land in the same split.
SplitDataset split_corpus(std::span<const signalgen::IQWaveform> waves, const SplitRatios& ratios, double fraction,
                          std::uint64_t seed, std::size_t window, const SliceOptions& options = {});

}  // namespace fedprint::datapipe
