#include "fedprint/datapipe/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fedprint/common/rng.hpp"

namespace fedprint::datapipe {

CorpusPartition partition_corpus(std::span<const signalgen::IQWaveform> waves, const SplitRatios& ratios,
                                 double fraction, std::uint64_t seed) {
  using signalgen::InvalidArgument;
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("fraction must be in (0, 1]");
  const double sum = ratios.train + ratios.validation + ratios.test;
  if (ratios.train < 0 || ratios.validation < 0 || ratios.test <= 0 || std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must be non-negative, test > 0, and sum to 1");
  }

  std::map<std::uint32_t, std::vector<std::size_t>> by_tag;
  for (std::size_t i = 0; i < waves.size(); ++i) by_tag[waves[i].tag_id].push_back(i);

  CorpusPartition part;
  for (auto& [tag, idx] : by_tag) {
    if (idx.size() < 10) {
      throw InvalidArgument("tag " + std::to_string(tag) + " has " + std::to_string(idx.size()) +
                            " communications; at least 10 are required");
    }
    Rng rng = make_rng(seed, {hash_string("split"), tag});
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto used = static_cast<std::size_t>(
        std::max<long long>(1, std::llround(fraction * static_cast<double>(idx.size()))));
    const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(used)));
    const auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(used)));
    if (n_train + n_val >= used) {
      throw InvalidArgument("tag " + std::to_string(tag) + ": " + std::to_string(used) +
                            " retained communications leave an empty test split");
    }
    part.train.insert(part.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    part.validation.insert(part.validation.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                           idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    part.test.insert(part.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                     idx.begin() + static_cast<std::ptrdiff_t>(used));
  }
  std::sort(part.train.begin(), part.train.end());
  std::sort(part.validation.begin(), part.validation.end());
  std::sort(part.test.begin(), part.test.end());
  return part;
}

SplitDataset split_corpus(std::span<const signalgen::IQWaveform> waves, const SplitRatios& ratios, double fraction,
                          std::uint64_t seed, std::size_t window, const SliceOptions& options) {
  const CorpusPartition part = partition_corpus(waves, ratios, fraction, seed);
  SplitDataset out;
  out.fraction_used = fraction;
  auto fill = [&](const std::vector<std::size_t>& idx, std::vector<SliceExample>& dst) {
    for (std::size_t i : idx) {
      auto slices = slice_waveform(waves[i], window, i, options);
      std::move(slices.begin(), slices.end(), std::back_inserter(dst));
    }
  };
  fill(part.train, out.train);
  fill(part.validation, out.validation);
  fill(part.test, out.test);
  return out;
}

}  // namespace fedprint::datapipe
