#include "fedprint/augment/augment.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fedprint/common/rng.hpp"

namespace fedprint::augment {

void AugmentConfig::validate() const {
  for (double p : phi) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("augmentation coefficient must be >= 0");
  }
}

double column_scale(const datapipe::SliceExample& slice, std::size_t column) {
  const std::size_t n = slice.length();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(static_cast<double>(slice.data[2 * i + column]));
  return acc / static_cast<double>(n);
}

std::vector<datapipe::SliceExample> augment_slices(std::span<const datapipe::SliceExample> slices,
                                                   const AugmentConfig& config) {
  config.validate();
  std::vector<datapipe::SliceExample> out(slices.begin(), slices.end());
  out.reserve(slices.size() * (1 + config.phi.size()));
  for (std::size_t k = 0; k < config.phi.size(); ++k) {
    const double phi = config.phi[k];
    for (std::size_t s = 0; s < slices.size(); ++s) {
      datapipe::SliceExample ex = slices[s];
      Rng rng = make_rng(config.seed, {hash_string("augment"), k, s});
      std::normal_distribution<double> unit(0.0, 1.0);
      for (std::size_t col = 0; col < 2; ++col) {
        const double sigma = phi * column_scale(slices[s], col);
        if (sigma == 0.0) continue;
        for (std::size_t i = 0; i < ex.length(); ++i) {
          ex.data[2 * i + col] = static_cast<float>(static_cast<double>(ex.data[2 * i + col]) + sigma * unit(rng));
        }
      }
      out.push_back(std::move(ex));
    }
  }
  return out;
}

AugmentConfig parse_augment_flag(std::string_view text, std::uint64_t seed) {
  AugmentConfig cfg;
  cfg.seed = seed;
  cfg.phi.clear();
  if (text.substr(0, 4) == "phi=") text.remove_prefix(4);
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw std::invalid_argument("bad augmentation coefficient '" + std::string(item) + "'");
    }
    cfg.phi.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  cfg.validate();
  return cfg;
}

}  // namespace fedprint::augment
