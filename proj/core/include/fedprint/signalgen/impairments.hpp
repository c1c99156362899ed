#pragma once

#include <span>

#include "fedprint/common/rng.hpp"
#include "fedprint/signalgen/types.hpp"

namespace fedprint::signalgen {

/// Thrown when an impairment stage produces NaN/Inf. `stage()` names it.
class NonFiniteStage : public std::runtime_error {
 public:
  explicit NonFiniteStage(std::string stage)
      : std::runtime_error("non-finite output from impairment stage '" + stage + "'"), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Turns a real FM0 baseband into the tag's complex reply. Stages, in order:
/// edge smoothing, memoryless nonlinearity, CFO ramp, phase-noise walk,
/// I/Q imbalance, DC offset. Phase noise draws from `rng`.
IQWaveform apply_impairments(std::span<const double> baseband, const TagProfile& profile,
                             double sample_rate_hz, Rng& rng);

}  // namespace fedprint::signalgen
