#include "fedprint/fedavg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedprint::fedavg {
namespace {

// Compensated dot product (TwoProduct via fma, TwoSum), about twice double
// precision, so the float result is the correctly rounded combination.
float dot2(const double* a, const float* const* b, std::size_t i, std::size_t n) {
  double s = 0.0, c = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double x = static_cast<double>(b[r][i]);
    const double p = a[r] * x;
    const double pe = std::fma(a[r], x, -p);
    const double t = s + p;
    const double z = t - s;
    const double se = (s - (t - z)) + (p - z);
    s = t;
    c += pe + se;
  }
  const double hi = s + c;
  const double lo = c - (hi - s);
  // hi can sit exactly on a float midpoint; lo breaks the tie
  const float f = static_cast<float>(hi);
  if (lo == 0.0 || static_cast<double>(f) == hi) return f;
  const float g = std::nextafter(f, hi > f ? std::numeric_limits<float>::infinity()
                                           : -std::numeric_limits<float>::infinity());
  if (hi - static_cast<double>(f) != static_cast<double>(g) - hi) return f;
  return (lo > 0.0) == (g > f) ? g : f;
}

}  // namespace

AggregationPolicy parse_policy(std::string_view name) {
  if (name == "uniform") return AggregationPolicy::uniform;
  if (name == "weighted" || name == "data_weighted") return AggregationPolicy::data_weighted;
  throw std::invalid_argument("unknown aggregation policy '" + std::string(name) + "' (uniform|weighted)");
}

std::string policy_name(AggregationPolicy policy) {
  return policy == AggregationPolicy::uniform ? "uniform" : "weighted";
}

std::vector<double> aggregation_coefficients(std::span<const std::uint64_t> counts, AggregationPolicy policy) {
  if (counts.empty()) throw std::invalid_argument("aggregation over an empty reader set");
  std::vector<double> c(counts.size());
  if (policy == AggregationPolicy::uniform) {
    std::fill(c.begin(), c.end(), 1.0 / static_cast<double>(counts.size()));
    return c;
  }
  std::uint64_t total = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] == 0) throw std::invalid_argument("data-weighted aggregation needs positive example counts");
    total += counts[r];
  }
  for (std::size_t r = 0; r < counts.size(); ++r) {
    c[r] = static_cast<double>(counts[r]) / static_cast<double>(total);
  }
  return c;
}

std::vector<float> federated_average(std::span<const std::vector<float>> weight_sets,
                                     std::span<const std::uint64_t> counts, AggregationPolicy policy) {
  if (weight_sets.empty()) throw std::invalid_argument("federated_average: no weight sets");
  if (counts.size() != weight_sets.size()) {
    throw std::invalid_argument("federated_average: " + std::to_string(counts.size()) + " counts for " +
                                std::to_string(weight_sets.size()) + " weight sets");
  }
  const std::size_t n = weight_sets.front().size();
  for (std::size_t r = 1; r < weight_sets.size(); ++r) {
    if (weight_sets[r].size() != n) {
      throw std::invalid_argument("federated_average: weight set " + std::to_string(r) + " has " +
                                  std::to_string(weight_sets[r].size()) + " values, expected " + std::to_string(n));
    }
  }
  const std::vector<double> coef = aggregation_coefficients(counts, policy);
  const std::size_t R = weight_sets.size();
  std::vector<float> out(n);
  std::vector<const float*> rows(R);
  for (std::size_t r = 0; r < R; ++r) rows[r] = weight_sets[r].data();
  for (std::size_t i = 0; i < n; ++i) out[i] = dot2(coef.data(), rows.data(), i, R);
  return out;
}

std::vector<float> federated_average(std::span<const ReaderUpdate> updates, AggregationPolicy policy) {
  std::vector<const ReaderUpdate*> sorted;
  sorted.reserve(updates.size());
  for (const ReaderUpdate& u : updates) sorted.push_back(&u);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->reader_id < b->reader_id; });
  for (std::size_t r = 1; r < sorted.size(); ++r) {
    if (sorted[r]->reader_id == sorted[r - 1]->reader_id) {
      throw std::invalid_argument("federated_average: duplicate reader_id " + std::to_string(sorted[r]->reader_id));
    }
  }
  std::vector<std::vector<float>> sets;
  std::vector<std::uint64_t> counts;
  sets.reserve(sorted.size());
  for (const ReaderUpdate* u : sorted) {
    sets.push_back(u->weights);
    counts.push_back(u->example_count);
  }
  return federated_average(sets, counts, policy);
}

}  // namespace fedprint::fedavg
