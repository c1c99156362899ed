#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedprint::fedavg {

enum class AggregationPolicy { uniform, data_weighted };

/// Accepts "uniform", "weighted" and "data_weighted".
AggregationPolicy parse_policy(std::string_view name);
std::string policy_name(AggregationPolicy policy);

/// uniform: 1/R each; data_weighted: count_r / sum(count). Throws
/// std::invalid_argument for an empty list or a zero count under
/// data_weighted.
std::vector<double> aggregation_coefficients(std::span<const std::uint64_t> counts, AggregationPolicy policy);

/// One client's contribution to a round.
struct ReaderUpdate {
  std::uint32_t reader_id = 0;
  std::uint64_t example_count = 0;
  std::vector<float> weights;
};

/// Elementwise convex combination of `weight_sets` in the order given. Each
/// element is summed in double with a pairwise tree over the sets, then
/// rounded to float. Identical inputs are returned unchanged.
std::vector<float> federated_average(std::span<const std::vector<float>> weight_sets,
                                     std::span<const std::uint64_t> counts, AggregationPolicy policy);

/// Same, after sorting by reader_id, so the result does not depend on the
/// order in which updates arrived. Duplicate reader ids are rejected.
std::vector<float> federated_average(std::span<const ReaderUpdate> updates, AggregationPolicy policy);

}  // namespace fedprint::fedavg
