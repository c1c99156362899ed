#include <gtest/gtest.h>

#include <cmath>

#include "fedprint/augment.hpp"
#include "test_util.hpp"

using namespace fedprint;
using namespace fedprint::augment;
using datapipe::SliceExample;

namespace {

std::vector<SliceExample> random_slices(std::size_t count, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SliceExample> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i].data = fedprint::testing::random_vector<float>(2 * len, rng);
    out[i].label = static_cast<std::uint32_t>(i % 7);
    out[i].scenario_name = "SCEN-050-OTA";
    out[i].comm_id = i / 3;
  }
  return out;
}

}  // namespace

TEST(Augment, EmptyPhiIsIdentity) {
  const auto x = random_slices(10, 16, 1);
  AugmentConfig cfg;
  cfg.phi.clear();
  const auto out = augment_slices(x, cfg);
  ASSERT_EQ(out.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(out[i].data, x[i].data);
}

TEST(Augment, DefaultPhiQuintuplesTheSet) {
  const auto x = random_slices(100, 32, 2);
  const AugmentConfig cfg;
  ASSERT_EQ(cfg.phi, (std::vector<double>{0.20, 0.10, 0.05, 0.01}));
  const auto out = augment_slices(x, cfg);
  ASSERT_EQ(out.size(), 500u);
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t i = 0; i < 100; ++i) {
      const SliceExample& a = out[k * 100 + i];
      EXPECT_EQ(a.label, x[i].label);
      EXPECT_EQ(a.length(), x[i].length());
      EXPECT_EQ(a.scenario_name, x[i].scenario_name);
      EXPECT_EQ(a.comm_id, x[i].comm_id);
      if (k == 0) {
        EXPECT_EQ(a.data, x[i].data);
      } else {
        EXPECT_NE(a.data, x[i].data);
      }
    }
  }
}

TEST(Augment, NoiseStdTracksPhiTimesMeanAbs) {
  const auto x = random_slices(1, 10000, 3);
  AugmentConfig cfg;
  cfg.phi = {0.10};
  cfg.seed = 11;
  const auto out = augment_slices(x, cfg);
  for (std::size_t col = 0; col < 2; ++col) {
    double mean_abs = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) mean_abs += std::abs(double(x[0].data[2 * i + col]));
    mean_abs /= 10000.0;
    EXPECT_NEAR(column_scale(x[0], col), mean_abs, 1e-12);
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      const double d = double(out[1].data[2 * i + col]) - double(x[0].data[2 * i + col]);
      sum += d;
      sq += d * d;
    }
    const double mean = sum / 10000.0;
    const double sd = std::sqrt(sq / 10000.0 - mean * mean);
    EXPECT_NEAR(sd, 0.10 * mean_abs, 0.03 * 0.10 * mean_abs) << "column " << col;
  }
}

TEST(Augment, ColumnsAreIndependent) {
  const auto x = random_slices(1, 10000, 4);
  AugmentConfig cfg;
  cfg.phi = {0.2};
  const auto out = augment_slices(x, cfg);
  std::vector<double> a(10000), b(10000);
  for (std::size_t i = 0; i < 10000; ++i) {
    a[i] = double(out[1].data[2 * i]) - double(x[0].data[2 * i]);
    b[i] = double(out[1].data[2 * i + 1]) - double(x[0].data[2 * i + 1]);
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / double(v.size());
  };
  const double ma = mean(a), mb = mean(b);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  EXPECT_LT(std::abs(cov / std::sqrt(va * vb)), 0.05);
}

TEST(Augment, ZeroPhiReproducesOriginals) {
  const auto x = random_slices(5, 64, 5);
  AugmentConfig cfg;
  cfg.phi = {0.0, 0.1, 0.0};
  const auto out = augment_slices(x, cfg);
  ASSERT_EQ(out.size(), 20u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(out[5 + i].data, x[i].data);
    EXPECT_EQ(out[15 + i].data, x[i].data);
  }
}

TEST(Augment, DeterministicUnderSeed) {
  const auto x = random_slices(4, 64, 6);
  AugmentConfig cfg;
  cfg.seed = 99;
  const auto a = augment_slices(x, cfg);
  const auto b = augment_slices(x, cfg);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].data, b[i].data);
  cfg.seed = 100;
  EXPECT_NE(augment_slices(x, cfg)[4].data, a[4].data);
}

TEST(Augment, RejectsNegativePhi) {
  const auto x = random_slices(2, 8, 7);
  AugmentConfig cfg;
  cfg.phi = {0.1, -0.01};
  EXPECT_THROW(augment_slices(x, cfg), std::invalid_argument);
}

TEST(AugmentFlag, Parses) {
  EXPECT_EQ(parse_augment_flag("phi=0.20,0.10,0.05,0.01").phi, (std::vector<double>{0.20, 0.10, 0.05, 0.01}));
  EXPECT_EQ(parse_augment_flag("0.5").phi, (std::vector<double>{0.5}));
  EXPECT_TRUE(parse_augment_flag("phi=").phi.empty());
  EXPECT_EQ(parse_augment_flag("phi=0.1", 42).seed, 42u);
  EXPECT_THROW(parse_augment_flag("phi=0.1,abc"), std::invalid_argument);
  EXPECT_THROW(parse_augment_flag("phi=-0.1"), std::invalid_argument);
  EXPECT_THROW(parse_augment_flag("phi=0.1,,0.2"), std::invalid_argument);
}
