#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedprint/fedavg/aggregate.hpp"

namespace fedprint::harness {

enum class Mode { local, union_, baseline, federated, federated_da, union_da };

/// "local", "union", "baseline", "federated", "federated+DA", "union+DA".
std::string mode_name(Mode mode);
Mode parse_mode(std::string_view name);
bool uses_augmentation(Mode mode);

class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Seeds {
  std::uint64_t population = 1;
  /// Mixed into every scenario's channel seed.
  std::uint64_t corpus = 2;
  std::uint64_t split = 3;
  std::uint64_t init = 4;
  std::uint64_t train = 5;
  std::uint64_t augment = 6;

  friend bool operator==(const Seeds&, const Seeds&) = default;
};

/// One experiment. Every field is written to the results record.
struct ExperimentSpec {
  std::string name = "experiment";
  /// Builtin catalog name or path to a catalog file.
  std::string catalog = "desk";
  std::vector<std::string> scenarios = {"OTA20", "OTA50", "OTA100"};
  std::uint32_t tags = 20;
  std::uint32_t comms_per_tag = 200;
  double fraction = 1.0;
  std::uint32_t window = 1024;
  std::uint32_t convs = 2;
  Mode mode = Mode::union_;
  /// Training epochs for local/union/baseline models.
  std::size_t epochs = 30;
  /// Stop once validation accuracy has not improved for this many epochs
  /// (0 keeps training for all epochs).
  std::size_t patience = 0;
  std::size_t rounds = 30;
  std::size_t local_epochs = 1;
  std::size_t bootstrap_epochs = 0;
  fedavg::AggregationPolicy policy = fedavg::AggregationPolicy::uniform;
  std::size_t batch_size = 64;
  /// Augmentation coefficients. DA modes default to {0.20, 0.10, 0.05,
  /// 0.01}; in local mode a non-empty list turns augmentation on.
  std::vector<double> phi;
  /// Allows more than 100 tags.
  bool large_population = false;
  Seeds seeds;

  /// Throws SpecError describing the first bad field.
  void validate() const;
  /// phi, with the default filled in for DA modes.
  std::vector<double> effective_phi() const;

  friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

/// JSON object text. Parsing requires every field; unknown keys are errors.
std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(std::string_view text);

/// A suite file holds {"specs": [...]} or a bare array. Missing fields take
/// their defaults from an optional "defaults" object, then from
/// ExperimentSpec's defaults.
std::vector<ExperimentSpec> load_suite(std::string_view text);

}  // namespace fedprint::harness
