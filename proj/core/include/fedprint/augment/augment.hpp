#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedprint/datapipe/slice.hpp"

namespace fedprint::augment {

/// Perturbation coefficients applied at the reader side.
struct AugmentConfig {
  std::vector<double> phi = {0.20, 0.10, 0.05, 0.01};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mean absolute value of one column (0 = I, 1 = Q) of a slice.
double column_scale(const datapipe::SliceExample& slice, std::size_t column);

/// Returns X followed by one perturbed copy of X per phi. For each slice and
/// phi, column c gets i.i.d. N(0, (phi * column_scale(c))^2) noise. Labels and
/// shapes are preserved. Throws std::invalid_argument for negative phi.
std::vector<datapipe::SliceExample> augment_slices(std::span<const datapipe::SliceExample> slices,
                                                   const AugmentConfig& config);

/// Parses "phi=0.20,0.10,0.05,0.01" (the "phi=" prefix is optional; an empty
/// list disables augmentation).
AugmentConfig parse_augment_flag(std::string_view text, std::uint64_t seed = 0);

}  // namespace fedprint::augment
