#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "fedprint/signalgen.hpp"
#include "test_util.hpp"

using namespace fedprint;
using namespace fedprint::signalgen;

namespace {

RN16Frame frame_with(std::vector<bool> payload) {
  RN16Frame f;
  f.payload_bits = std::move(payload);
  return f;
}

// Remainder of (preset * x^n + message * x^5) mod (x^5 + x^3 + 1), by long
// division over GF(2). Bit vectors are highest degree first.
std::vector<bool> crc5_by_division(const std::vector<bool>& msg) {
  const std::size_t n = msg.size();
  std::vector<bool> dividend(n + 5, false);
  for (std::size_t i = 0; i < n; ++i) dividend[i] = msg[i];
  const bool preset[5] = {false, true, false, false, true};
  for (std::size_t i = 0; i < 5; ++i) dividend[i] = dividend[i] != preset[i];
  const bool gen[6] = {true, false, true, false, false, true};
  for (std::size_t i = 0; i < n; ++i) {
    if (!dividend[i]) continue;
    for (std::size_t j = 0; j < 6; ++j) dividend[i + j] = dividend[i + j] != gen[j];
  }
  return {dividend.begin() + static_cast<std::ptrdiff_t>(n), dividend.end()};
}

IQWaveform flat_wave(std::size_t n, Complex value) {
  IQWaveform w;
  w.samples.assign(n, value);
  w.signal_len = n;
  return w;
}

ChannelScenario quiet_scenario(double distance_cm, Obstacle obstacle = Obstacle::none()) {
  return make_scenario(distance_cm, obstacle, std::numeric_limits<double>::infinity(), {}, 1);
}

}  // namespace

TEST(Rn16, SameSeedGivesSamePayload) {
  Rng a(42), b(42);
  EXPECT_EQ(generate_rn16(a).payload_bits, generate_rn16(b).payload_bits);
}

TEST(Rn16, ConsecutiveCallsDiffer) {
  Rng rng(7);
  const auto first = generate_rn16(rng).payload_bits;
  const auto second = generate_rn16(rng).payload_bits;
  EXPECT_EQ(first.size(), kPayloadBits);
  EXPECT_NE(first, second);
}

TEST(Rn16, PerBitMeanIsBalanced) {
  Rng rng(2024);
  std::vector<int> ones(kPayloadBits, 0);
  constexpr int kCalls = 10000;
  for (int i = 0; i < kCalls; ++i) {
    const auto bits = generate_rn16(rng).payload_bits;
    for (std::size_t b = 0; b < kPayloadBits; ++b) ones[b] += bits[b] ? 1 : 0;
  }
  for (std::size_t b = 0; b < kPayloadBits; ++b) {
    const double mean = static_cast<double>(ones[b]) / kCalls;
    EXPECT_GE(mean, 0.47) << "bit " << b;
    EXPECT_LE(mean, 0.53) << "bit " << b;
  }
}

TEST(Crc5, MatchesPolynomialDivision) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto bits = generate_rn16(rng).payload_bits;
    EXPECT_EQ(crc5(bits), crc5_by_division(bits));
  }
}

TEST(Crc5, MessageWithCrcLeavesZeroResidue) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto bits = generate_rn16(rng).payload_bits;
    const auto c = crc5(bits);
    bits.insert(bits.end(), c.begin(), c.end());
    EXPECT_EQ(crc5_by_division(bits), std::vector<bool>(5, false));
  }
}

TEST(Fm0, SamplesPerBitAtDefaultRates) {
  EXPECT_EQ(samples_per_bit(5e6, 40e3), 125u);
  EXPECT_THROW(samples_per_bit(70e3, 40e3), InvalidArgument);
  EXPECT_NO_THROW(samples_per_bit(80e3, 40e3));
}

TEST(Fm0, FrameFitsTheCommunicationWindow) {
  Rng rng(1);
  const RN16Frame f = generate_rn16(rng);
  EXPECT_EQ(encoded_bit_count(f), 23u);
  const auto base = fm0_encode(f, 5e6);
  ASSERT_EQ(base.size(), 3400u);
  for (std::size_t i = 0; i < 2875; ++i) ASSERT_EQ(std::abs(base[i]), 1.0) << i;
  for (std::size_t i = 2875; i < 3400; ++i) ASSERT_EQ(base[i], 0.0) << i;
  EXPECT_EQ(fm0_encode(f, 5e6, 1000).size(), 1000u);
  EXPECT_THROW(fm0_encode(f, 50e3), InvalidArgument);
}

TEST(Fm0, CrcFlagAddsFiveBits) {
  Rng rng(1);
  EXPECT_EQ(encoded_bit_count(generate_rn16(rng, true)), 28u);
}

TEST(Fm0, PayloadFollowsLineCodeRules) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const RN16Frame f = generate_rn16(rng);
    const auto x = fm0_encode(f, 5e6);
    constexpr std::size_t spb = 125;
    std::vector<bool> bits = f.payload_bits;
    bits.push_back(true);  // dummy
    for (std::size_t k = 0; k < bits.size(); ++k) {
      const std::size_t start = (kPreambleBits + k) * spb;
      EXPECT_NE(x[start], x[start - 1]) << "no inversion at boundary of bit " << k;
      std::size_t inner = 0;
      for (std::size_t i = start + 1; i < start + spb; ++i) inner += x[i] != x[i - 1] ? 1 : 0;
      EXPECT_EQ(inner, bits[k] ? 0u : 1u) << "bit " << k;
    }
  }
}

TEST(Fm0, AllZeroPayloadInvertsEveryHalfBit) {
  const auto x = fm0_encode(frame_with(std::vector<bool>(16, false)), 5e6);
  constexpr std::size_t spb = 125;
  const std::size_t begin = kPreambleBits * spb;
  const std::size_t end = begin + 16 * spb;
  std::vector<std::size_t> flips;
  for (std::size_t i = begin; i < end; ++i) {
    if (x[i] != x[i - 1]) flips.push_back(i);
  }
  ASSERT_EQ(flips.size(), 32u);
  for (std::size_t j = 1; j < flips.size(); ++j) {
    const std::size_t gap = flips[j] - flips[j - 1];
    EXPECT_TRUE(gap == 62 || gap == 63) << gap;
  }
}

TEST(Fm0, PreambleIsIdenticalAcrossFrames) {
  const auto a = fm0_encode(frame_with(std::vector<bool>(16, false)), 5e6);
  const auto b = fm0_encode(frame_with(std::vector<bool>(16, true)), 5e6);
  for (std::size_t i = 0; i < kPreambleBits * 125; ++i) ASSERT_EQ(a[i], b[i]) << i;
}

TEST(LinkTiming, TenAndOneOverRate) {
  const LinkTiming t = link_timing(40e3);
  EXPECT_DOUBLE_EQ(t.t1_s, 250e-6);
  EXPECT_DOUBLE_EQ(t.t2_s, 25e-6);
}

TEST(Impairments, IdentityProfileIsPassThrough) {
  Rng rng(1);
  const auto base = fm0_encode(generate_rn16(rng), 5e6);
  const IQWaveform w = apply_impairments(base, TagProfile::identity(3), 5e6, rng);
  ASSERT_EQ(w.samples.size(), base.size());
  EXPECT_EQ(w.tag_id, 3u);
  for (std::size_t i = 0; i < base.size(); ++i) {
    ASSERT_EQ(w.samples[i], Complex(base[i], 0.0)) << i;
  }
}

TEST(Impairments, CfoAdvancesPhaseLinearly) {
  Rng rng(1);
  const auto base = fm0_encode(generate_rn16(rng), 5e6);
  TagProfile p = TagProfile::identity();
  p.cfo_hz = 1000.0;
  const IQWaveform ideal = apply_impairments(base, TagProfile::identity(), 5e6, rng);
  const IQWaveform w = apply_impairments(base, p, 5e6, rng);
  for (std::size_t n = 0; n < 2875; n += 7) {
    const double expected = 2.0 * std::numbers::pi * 1000.0 * static_cast<double>(n) / 5e6;
    const Complex ratio = w.samples[n] / ideal.samples[n];
    EXPECT_NEAR(std::abs(ratio), 1.0, 1e-12);
    EXPECT_NEAR(std::remainder(std::arg(ratio) - expected, 2.0 * std::numbers::pi), 0.0, 1e-9) << n;
  }
}

TEST(Impairments, DcOffsetOnZeroBaseband) {
  Rng rng(1);
  TagProfile p = TagProfile::identity();
  p.dc_offset = {0.1, 0.0};
  const std::vector<double> zeros(64, 0.0);
  const IQWaveform w = apply_impairments(zeros, p, 5e6, rng);
  for (const Complex& z : w.samples) EXPECT_EQ(z, Complex(0.1, 0.0));
}

TEST(Impairments, NonlinearityAndIqImbalance) {
  Rng rng(1);
  TagProfile p = TagProfile::identity();
  p.harmonic_coeffs = {0.05, -0.03};
  p.iq_gain_imbalance = 1.07;
  p.iq_phase_imbalance_rad = 0.02;
  const std::vector<double> base = {1.0, -1.0, 0.5, 0.0};
  const IQWaveform w = apply_impairments(base, p, 5e6, rng);
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double x = base[i];
    const double y = x + 0.05 * x * x - 0.03 * x * x * x;
    EXPECT_NEAR(w.samples[i].real(), 1.07 * y, 1e-15);
    EXPECT_NEAR(w.samples[i].imag(), std::sin(0.02) * y, 1e-15);
  }
}

TEST(Impairments, RiseTimeSmoothsEdges) {
  Rng rng(1);
  TagProfile p = TagProfile::identity();
  p.rise_time_samples = 4.0;
  const std::vector<double> step(40, 1.0);
  const IQWaveform w = apply_impairments(step, p, 5e6, rng);
  EXPECT_NEAR(w.samples[0].real(), 0.2, 1e-15);
  for (std::size_t i = 1; i < step.size(); ++i) EXPECT_GT(w.samples[i].real(), w.samples[i - 1].real());
  EXPECT_LT(w.samples.back().real(), 1.0);
}

TEST(Impairments, PhaseNoiseKeepsMagnitude) {
  Rng rng(9);
  TagProfile p = TagProfile::identity();
  p.phase_noise_std_rad = 1e-3;
  const std::vector<double> ones(500, 1.0);
  const IQWaveform w = apply_impairments(ones, p, 5e6, rng);
  bool rotated = false;
  for (const Complex& z : w.samples) {
    EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
    rotated = rotated || z.imag() != 0.0;
  }
  EXPECT_TRUE(rotated);
}

TEST(Impairments, NamesTheStageThatOverflowed) {
  Rng rng(1);
  TagProfile p = TagProfile::identity();
  p.harmonic_coeffs = {0.0, 1.0};
  const std::vector<double> huge = {1e200};
  try {
    apply_impairments(huge, p, 5e6, rng);
    FAIL() << "expected NonFiniteStage";
  } catch (const NonFiniteStage& e) {
    EXPECT_EQ(e.stage(), "nonlinearity");
  }
  const std::vector<double> bad = {std::nan("")};
  try {
    apply_impairments(bad, TagProfile::identity(), 5e6, rng);
    FAIL() << "expected NonFiniteStage";
  } catch (const NonFiniteStage& e) {
    EXPECT_EQ(e.stage(), "input");
  }
}

TEST(Impairments, RejectsInvalidProfile) {
  Rng rng(1);
  const std::vector<double> base(8, 1.0);
  TagProfile p = TagProfile::identity();
  p.iq_gain_imbalance = 0.0;
  EXPECT_THROW(apply_impairments(base, p, 5e6, rng), InvalidArgument);
  p = TagProfile::identity();
  p.phase_noise_std_rad = -1.0;
  EXPECT_THROW(apply_impairments(base, p, 5e6, rng), InvalidArgument);
  p = TagProfile::identity();
  p.rise_time_samples = -1.0;
  EXPECT_THROW(apply_impairments(base, p, 5e6, rng), InvalidArgument);
}

TEST(Channel, ReferenceScenarioIsIdentity) {
  Rng rng(1);
  const auto base = fm0_encode(generate_rn16(rng), 5e6);
  IQWaveform in = apply_impairments(base, TagProfile::identity(), 5e6, rng);
  const IQWaveform out = apply_channel(in, quiet_scenario(20.0), rng);
  EXPECT_EQ(out.samples, in.samples);
}

TEST(Channel, DistanceScalesAmplitude) {
  Rng rng(1);
  const IQWaveform in = flat_wave(100, {0.3, -0.7});
  const IQWaveform out = apply_channel(in, quiet_scenario(100.0), rng);
  for (std::size_t i = 0; i < in.samples.size(); ++i) {
    EXPECT_NEAR(std::abs(out.samples[i]) / std::abs(in.samples[i]), 0.2, 1e-9);
  }
}

TEST(Channel, TissueAttenuationInDb) {
  Rng rng(1);
  const IQWaveform in = flat_wave(100, {1.0, 0.5});
  const IQWaveform out = apply_channel(in, quiet_scenario(20.0, Obstacle::tissue(3.0, 1.6)), rng);
  const double db = 10.0 * std::log10(signal_power(in) / signal_power(out));
  EXPECT_NEAR(db, 4.8, 0.01);
}

TEST(Channel, EmpiricalSnrMatchesRequest) {
  const auto profiles = generate_population(4, 11);
  for (double snr : {0.0, 10.0, 25.0}) {
    const ChannelScenario noisy = make_scenario(50, Obstacle::none(), snr, {}, 77);
    double ratio_db_sum = 0.0;
    for (std::size_t c = 0; c < 100; ++c) {
      Rng rng(derive_seed(5, {c}));
      const TagProfile& p = profiles[c % profiles.size()];
      const auto base = fm0_encode(generate_rn16(rng), 5e6);
      IQWaveform clean = apply_impairments(base, p, 5e6, rng);
      clean.signal_len = 2875;
      const IQWaveform attenuated = apply_channel(clean, quiet_scenario(50.0), rng);
      const IQWaveform out = apply_channel(clean, noisy, rng);
      double noise = 0.0;
      for (std::size_t i = 0; i < 2875; ++i) noise += std::norm(out.samples[i] - attenuated.samples[i]);
      noise /= 2875.0;
      ratio_db_sum += 10.0 * std::log10(signal_power(attenuated) / noise);
    }
    EXPECT_NEAR(ratio_db_sum / 100.0, snr, 0.5) << "requested " << snr << " dB";
  }
}

TEST(Channel, InterfererPowerIsRelative) {
  Rng rng(3);
  const IQWaveform in = flat_wave(5000, {0.0, 0.0});
  IQWaveform sig = flat_wave(5000, {1.0, 0.0});
  ChannelScenario s = make_scenario(20, Obstacle::none(), std::numeric_limits<double>::infinity(),
                                    {{100e3, -6.0}}, 1);
  const IQWaveform out = apply_channel(sig, s, rng);
  double tone_power = 0.0;
  for (std::size_t i = 0; i < out.samples.size(); ++i) tone_power += std::norm(out.samples[i] - sig.samples[i]);
  tone_power /= static_cast<double>(out.samples.size());
  EXPECT_NEAR(10.0 * std::log10(tone_power), -6.0, 1e-9);
  EXPECT_THROW(apply_channel(in, s, rng), InvalidArgument);
}

TEST(Channel, RejectsSnrOnSilence) {
  Rng rng(1);
  const IQWaveform zero = flat_wave(64, {0.0, 0.0});
  EXPECT_THROW(apply_channel(zero, make_scenario(20, Obstacle::none(), 10.0, {}, 1), rng), InvalidArgument);
}

TEST(ScenarioCodec, RoundTripsNames) {
  const std::vector<ScenarioCode> codes = {
      {20.0, Obstacle::none()},
      {100.0, Obstacle::none()},
      {20.0, Obstacle::tissue(kPm0ThicknessCm, kFatAttenDbPerCm)},
      {50.0, Obstacle::tissue(kPm1ThicknessCm, kMuscleAttenDbPerCm)},
      {35.0, Obstacle::tissue(1.5, 2.3)},
  };
  for (const ScenarioCode& c : codes) {
    const std::string name = encode_scenario_name(c);
    EXPECT_EQ(decode_scenario_name(name), c) << name;
  }
  EXPECT_EQ(encode_scenario_name(codes[0]), "SCEN-020-OTA");
  EXPECT_EQ(encode_scenario_name(codes[3]), "SCEN-050-PM1");
  EXPECT_EQ(short_label(codes[1]), "OTA100");
  EXPECT_EQ(short_label(codes[3]), "PM1-50");
}

TEST(ScenarioCodec, RejectsMalformedNames) {
  for (const char* bad : {"", "OTA20", "SCEN-", "SCEN-020", "SCEN-abc-OTA", "SCEN-000-OTA", "SCEN-020-XYZ",
                          "SCEN-020-TIS15"}) {
    EXPECT_THROW(decode_scenario_name(bad), InvalidArgument) << bad;
  }
  EXPECT_THROW(encode_scenario_name({0.0, Obstacle::none()}), InvalidArgument);
}

TEST(Scenario, ValidateChecksFields) {
  ChannelScenario s = make_scenario(20, Obstacle::none(), 10.0, {}, 1);
  EXPECT_NO_THROW(s.validate());
  ChannelScenario far = s;
  far.distance_cm = 50.0;
  EXPECT_THROW(far.validate(), InvalidArgument);
  ChannelScenario neg = s;
  neg.distance_cm = -1.0;
  EXPECT_THROW(neg.validate(), InvalidArgument);
  EXPECT_THROW(make_scenario(20, Obstacle::tissue(-1.0, 1.0), 10.0, {}, 1), InvalidArgument);
}

TEST(Scenario, CatalogJsonRoundTrip) {
  for (const std::string& name : builtin_catalog_names()) {
    const ScenarioCatalog c = builtin_catalog(name);
    EXPECT_NO_THROW(c.validate());
    const ScenarioCatalog back = catalog_from_json(catalog_to_json(c));
    EXPECT_EQ(back.name, c.name);
    EXPECT_EQ(back.scenarios, c.scenarios);
  }
  const ChannelScenario inf = quiet_scenario(20.0);
  EXPECT_EQ(scenario_from_json(scenario_to_json(inf)), inf);
  EXPECT_THROW(builtin_catalog("nope"), InvalidArgument);
}

TEST(Scenario, CatalogFindsByNameOrLabel) {
  const ScenarioCatalog c = builtin_catalog("desk");
  EXPECT_EQ(c.find("OTA50").name, "SCEN-050-OTA");
  EXPECT_EQ(c.find("SCEN-050-PM1").name, "SCEN-050-PM1");
  EXPECT_ANY_THROW(c.find("OTA70"));
}

TEST(Population, ProfilesAreDistinctAndInRange) {
  const ImpairmentRanges r;
  const auto pop = generate_population(50, 123);
  ASSERT_EQ(pop.size(), 50u);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    const TagProfile& p = pop[i];
    EXPECT_EQ(p.tag_id, i);
    EXPECT_NO_THROW(p.validate());
    EXPECT_LE(std::abs(p.cfo_hz), r.cfo_max_hz);
    EXPECT_GE(p.iq_gain_imbalance, r.gain_min);
    EXPECT_LE(p.iq_gain_imbalance, r.gain_max);
    EXPECT_LE(std::abs(p.iq_phase_imbalance_rad), r.phase_imbalance_max_rad);
    EXPECT_GE(p.phase_noise_std_rad, 0.0);
    EXPECT_LE(p.phase_noise_std_rad, r.phase_noise_max_rad);
    EXPECT_GE(p.rise_time_samples, 0.0);
    EXPECT_LE(p.rise_time_samples, r.rise_time_max_samples);
    for (std::size_t j = 0; j < i; ++j) {
      TagProfile q = pop[j];
      q.tag_id = p.tag_id;
      EXPECT_NE(p, q) << i << " vs " << j;
    }
  }
}

TEST(Population, DifferentSeedsDiffer) {
  const auto a = generate_population(5, 1);
  const auto b = generate_population(5, 2);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NE(a[i], b[i]);
  EXPECT_EQ(generate_population(3, 1)[2], a[2]);
}

TEST(Population, NoiselessWaveformsAreSeparable) {
  const auto pop = generate_population(10, 9);
  Rng frame_rng(1);
  const auto base = fm0_encode(generate_rn16(frame_rng), 5e6);
  std::vector<IQWaveform> waves;
  for (const TagProfile& p : pop) {
    Rng rng(99);
    waves.push_back(apply_impairments(base, p, 5e6, rng));
  }
  for (std::size_t i = 0; i < waves.size(); ++i) {
    for (std::size_t j = i + 1; j < waves.size(); ++j) {
      double dist = 0.0;
      for (std::size_t n = 0; n < base.size(); ++n) dist += std::abs(waves[i].samples[n] - waves[j].samples[n]);
      EXPECT_GT(dist / static_cast<double>(base.size()), 0.0) << i << " vs " << j;
    }
  }
}

TEST(Synthesis, CardinalityAndLabels) {
  const auto pop = generate_population(20, 1);
  const ChannelScenario s = builtin_catalog("desk").find("OTA20");
  const auto waves = synthesize_scenario(pop, s, 200);
  ASSERT_EQ(waves.size(), 4000u);
  for (std::size_t i = 0; i < waves.size(); ++i) {
    ASSERT_EQ(waves[i].tag_id, i / 200);
    ASSERT_EQ(waves[i].samples.size(), kDefaultCommLength);
    ASSERT_EQ(waves[i].scenario_name, s.name);
    ASSERT_EQ(waves[i].signal_len, 2875u);
  }
}

TEST(Synthesis, DeterministicAndFinite) {
  const auto pop = generate_population(3, 1);
  const ChannelScenario s = builtin_catalog("desk").find("PM1-50");
  const auto a = synthesize_scenario(pop, s, 5);
  const auto b = synthesize_scenario(pop, s, 5);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].samples, b[i].samples);
    for (const Complex& z : a[i].samples) {
      ASSERT_TRUE(std::isfinite(z.real()) && std::isfinite(z.imag()));
      ASSERT_EQ(z.real(), static_cast<double>(static_cast<float>(z.real())));
    }
  }
  ChannelScenario other = s;
  other.seed += 1;
  EXPECT_NE(synthesize_scenario(pop, other, 5)[0].samples, a[0].samples);
}

TEST(Synthesis, PayloadSaltOnlyChangesPayload) {
  const auto pop = generate_population(1, 1);
  ChannelScenario s = quiet_scenario(20.0);
  SynthesisOptions salted;
  salted.payload_salt = 1;
  const IQWaveform a = synthesize_communication(pop[0], s, 0);
  const IQWaveform b = synthesize_communication(pop[0], s, 0, salted);
  // The preamble region is payload independent.
  for (std::size_t i = 0; i < kPreambleBits * 125; ++i) ASSERT_EQ(a.samples[i], b.samples[i]) << i;
  EXPECT_NE(a.samples, b.samples);
}

TEST(Synthesis, RejectsBadInput) {
  const ChannelScenario s = quiet_scenario(20.0);
  std::vector<TagProfile> dup = {TagProfile::identity(1), TagProfile::identity(1)};
  EXPECT_THROW(synthesize_scenario(dup, s, 2), InvalidArgument);
  EXPECT_THROW(synthesize_scenario(std::vector<TagProfile>{}, s, 2), InvalidArgument);
  const auto pop = generate_population(2, 1);
  EXPECT_THROW(synthesize_scenario(pop, s, 0), InvalidArgument);
}

TEST(Rng, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  EXPECT_NE(hash_string("a"), hash_string("b"));
}
