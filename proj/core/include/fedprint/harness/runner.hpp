#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fedprint/datapipe/split.hpp"
#include "fedprint/harness/experiment.hpp"
#include "fedprint/harness/results.hpp"
#include "fedprint/nn/arch.hpp"
#include "fedprint/nn/trainer.hpp"
#include "fedprint/signalgen/types.hpp"

namespace fedprint::harness {

struct ScenarioData {
  signalgen::ChannelScenario scenario;
  std::string label;
  datapipe::SplitDataset split;
};

/// Split datasets of every scenario in a spec, in spec order.
struct Corpus {
  std::vector<ScenarioData> scenarios;
};

/// The catalog scenario for `name` with its channel seed mixed with the
/// spec's corpus seed.
signalgen::ChannelScenario resolve_scenario(const ExperimentSpec& spec, const std::string& name);

/// Synthesizes and splits each scenario. Raw waveforms are dropped as soon as
/// they are sliced.
Corpus build_corpus(const ExperimentSpec& spec);

nn::ArchConfig spec_arch(const ExperimentSpec& spec);

struct CrossMatrix {
  std::vector<std::string> labels;
  /// accuracy[i][j]: trained on i, tested on j.
  std::vector<std::vector<double>> accuracy;
  std::vector<std::vector<nn::Evaluation>> evaluations;
  std::vector<CurvePoint> curves;

  double diagonal_mean() const;
  double off_diagonal_mean() const;
  /// Mean of every entry.
  double mean() const;
};

/// Trains one model per scenario and tests it on every scenario.
CrossMatrix run_cross_matrix(const ExperimentSpec& spec, const Corpus& corpus);

/// Runs one spec on a prebuilt corpus (must come from build_corpus(spec) or
/// a spec differing only in training fields).
ResultsRecord run_experiment(const ExperimentSpec& spec, const Corpus& corpus);
ResultsRecord run_experiment(const ExperimentSpec& spec);

using ProgressFn = std::function<void(const std::string&)>;

struct SuiteOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  std::filesystem::path dir;
};

/// Runs every spec into out_dir/<name>. A failing spec leaves its spec and an
/// `error` file and does not stop the suite.
std::vector<SuiteOutcome> run_suite(const std::vector<ExperimentSpec>& specs, const std::filesystem::path& out_dir,
                                    const ProgressFn& progress = {});

}  // namespace fedprint::harness
