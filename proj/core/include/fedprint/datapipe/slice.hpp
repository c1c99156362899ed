#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedprint/signalgen/types.hpp"

namespace fedprint::datapipe {

inline constexpr std::size_t kWindowShort = 1024;
inline constexpr std::size_t kWindowLong = 3072;

/// L x 2 classifier input, row-major: data[2*i] = I, data[2*i + 1] = Q.
struct SliceExample {
  std::vector<float> data;
  std::uint32_t label = 0;
  std::string scenario_name;
  /// Index of the source communication within its corpus.
  std::uint64_t comm_id = 0;

  std::size_t length() const noexcept { return data.size() / 2; }
};

struct SliceOptions {
  /// Per-slice zero-mean/unit-variance scaling of each column. Off by default.
  bool standardize = false;
};

/// floor(|samples| / window) contiguous, non-overlapping slices. A window
/// longer than the waveform yields no slices.
std::vector<SliceExample> slice_waveform(const signalgen::IQWaveform& wave, std::size_t window,
                                         std::uint64_t comm_id = 0, const SliceOptions& options = {});

}  // namespace fedprint::datapipe
