#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprint::signalgen {

using Complex = std::complex<double>;

inline constexpr double kDefaultSampleRateHz = 5e6;
inline constexpr double kDefaultBlfHz = 40e3;
inline constexpr std::size_t kDefaultCommLength = 3400;
inline constexpr double kReferenceDistanceCm = 20.0;

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-tag hardware impairments. These are the fingerprint a classifier has to
/// learn; the ideal tag is `TagProfile::identity()`.
struct TagProfile {
  std::uint32_t tag_id = 0;
  double cfo_hz = 0.0;
  double iq_gain_imbalance = 1.0;
  double iq_phase_imbalance_rad = 0.0;
  Complex dc_offset{0.0, 0.0};
  double phase_noise_std_rad = 0.0;
  /// {c2, c3}: y = x + c2 x^2 + c3 x^3. Missing entries are zero.
  std::vector<double> harmonic_coeffs;
  double rise_time_samples = 0.0;

  static TagProfile identity(std::uint32_t tag_id = 0) {
    TagProfile p;
    p.tag_id = tag_id;
    return p;
  }

  void validate() const;

  friend bool operator==(const TagProfile&, const TagProfile&) = default;
};

/// Ranges the population generator draws impairments from (uniformly).
struct ImpairmentRanges {
  double cfo_max_hz = 2000.0;
  double gain_min = 0.9;
  double gain_max = 1.1;
  double phase_imbalance_max_rad = 0.05;
  double dc_offset_max = 0.05;
  double phase_noise_max_rad = 5e-4;
  double harmonic_max = 0.05;
  double rise_time_max_samples = 8.0;
};

struct Obstacle {
  enum class Kind { none, tissue };
  Kind kind = Kind::none;
  double thickness_cm = 0.0;
  double atten_db_per_cm = 0.0;

  static Obstacle none() { return {}; }
  static Obstacle tissue(double thickness_cm, double atten_db_per_cm) {
    return {Kind::tissue, thickness_cm, atten_db_per_cm};
  }
  double attenuation_db() const { return kind == Kind::tissue ? thickness_cm * atten_db_per_cm : 0.0; }

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

/// Narrowband tone; power is relative to the post-attenuation signal power.
struct Interferer {
  double freq_hz = 0.0;
  double relative_power_db = 0.0;

  friend bool operator==(const Interferer&, const Interferer&) = default;
};

struct ChannelScenario {
  std::string name;
  double distance_cm = kReferenceDistanceCm;
  Obstacle obstacle;
  double snr_db = std::numeric_limits<double>::infinity();
  std::vector<Interferer> interferers;
  std::uint64_t seed = 0;

  /// Checks field ranges and that `name` agrees with distance/obstacle.
  void validate() const;

  friend bool operator==(const ChannelScenario&, const ChannelScenario&) = default;
};

/// One complex-sampled communication (RN16 reply window).
struct IQWaveform {
  std::vector<Complex> samples;
  double sample_rate_hz = kDefaultSampleRateHz;
  std::uint32_t tag_id = 0;
  std::string scenario_name;
  /// Number of leading samples that carry the reply; the rest is padding.
  std::size_t signal_len = 0;
};

struct RN16Frame {
  std::vector<bool> payload_bits;  // 16 bits
  bool with_crc5 = false;
  double blf_hz = kDefaultBlfHz;
};

}  // namespace fedprint::signalgen
