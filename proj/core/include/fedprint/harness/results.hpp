#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedprint/harness/experiment.hpp"

namespace fedprint::harness {

/// One row of curves.csv. `model` names the trained model ("union",
/// "federated", or a scenario label); `step` is an epoch or a round.
struct CurvePoint {
  std::string model;
  std::size_t step = 0;
  double train_loss = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> test_accuracy;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct ResultsRecord {
  ExperimentSpec spec;
  std::vector<CurvePoint> curves;
  /// Slice-level accuracy on the test split(s) of the mode.
  double test_accuracy = 0.0;
  /// Per-communication majority vote.
  double comm_accuracy = 0.0;
  std::size_t train_examples = 0;
  std::size_t test_examples = 0;
  /// confusion[true][predicted], summed over every evaluated pair.
  std::vector<std::vector<std::uint64_t>> confusion;
  /// Scenario labels in spec order.
  std::vector<std::string> scenario_labels;
  /// Final model on each scenario's test split (union / federated modes).
  std::vector<double> scenario_accuracy;
  /// Baseline only: cross[i][j] = model trained on i, tested on j.
  std::vector<std::vector<double>> cross_matrix;
  /// Federated modes.
  std::size_t rounds_completed = 0;
  std::uint64_t payload_bytes = 0;
  std::uint64_t bytes_per_round_down = 0;
  std::uint64_t bytes_per_round_up = 0;
  /// Not part of any determinism comparison.
  double wall_clock_s = 0.0;
};

class ResultsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSpecFile = "spec";
inline constexpr const char* kCurvesFile = "curves.csv";
inline constexpr const char* kConfusionFile = "confusion.csv";
inline constexpr const char* kSummaryFile = "summary";
inline constexpr const char* kErrorFile = "error";

/// Writes spec, curves.csv, confusion.csv and summary into `dir`.
void write_results(const std::filesystem::path& dir, const ResultsRecord& record);

/// Reads a results directory. The spec must carry every field; the confusion
/// matrix must agree with the recorded accuracy.
ResultsRecord read_results(const std::filesystem::path& dir);

/// Trace / total of a confusion matrix (0 when empty).
double confusion_accuracy(const std::vector<std::vector<std::uint64_t>>& confusion);

std::string curves_to_csv(const std::vector<CurvePoint>& curves);
std::string confusion_to_csv(const std::vector<std::vector<std::uint64_t>>& confusion);

}  // namespace fedprint::harness
