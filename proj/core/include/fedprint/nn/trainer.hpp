#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedprint/common/rng.hpp"
#include "fedprint/datapipe/slice.hpp"
#include "fedprint/nn/model.hpp"

namespace fedprint::nn {

/// Packs slices (L x 2 row-major) into a channels-first [B][2][L] batch.
std::vector<float> pack_batch(std::span<const datapipe::SliceExample> data, std::span<const std::size_t> indices);

/// One shuffled pass over `data` in mini-batches. Returns the mean loss.
double train_epoch(Model& model, std::span<const datapipe::SliceExample> data, std::size_t batch_size, Rng& rng);

struct Evaluation {
  double accuracy = 0.0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::uint64_t>> confusion;
  std::size_t total = 0;
  /// Majority vote over the slices of each communication.
  double comm_accuracy = 0.0;
  std::size_t comm_total = 0;
};

/// Read-only; deterministic for fixed model and data.
Evaluation evaluate(const Model& model, std::span<const datapipe::SliceExample> data);

struct FitOptions {
  std::size_t max_epochs = 100;
  std::size_t batch_size = 64;
  /// Stop after this many epochs without validation improvement (0 = never).
  std::size_t patience = 0;
  /// Stop as soon as validation accuracy reaches this value.
  double stop_at_val_accuracy = 2.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

struct FitResult {
  std::vector<EpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_val_accuracy = -1.0;
};

/// Trains up to max_epochs and leaves the best-validation weights in `model`.
FitResult fit(Model& model, std::span<const datapipe::SliceExample> train,
              std::span<const datapipe::SliceExample> validation, const FitOptions& options, Rng& rng);

}  // namespace fedprint::nn
