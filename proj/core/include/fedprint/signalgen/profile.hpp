#pragma once

#include <cstdint>
#include <vector>

#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

/// Draws `count` tag profiles with ids 0..count-1. Each tag uses its own
/// substream of `seed`, so tag k's profile does not depend on `count`.
std::vector<TagProfile> generate_population(std::size_t count, std::uint64_t seed,
                                            const ImpairmentRanges& ranges = {});

}  // namespace fedprint::signalgen
