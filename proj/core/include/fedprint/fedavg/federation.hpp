#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedprint/augment/augment.hpp"
#include "fedprint/datapipe/slice.hpp"
#include "fedprint/fedavg/session.hpp"
#include "fedprint/fedavg/transport.hpp"
#include "fedprint/nn/trainer.hpp"

namespace fedprint::fedavg {

struct FederationConfig {
  nn::ArchConfig arch;
  std::size_t rounds = 30;
  AggregationPolicy policy = AggregationPolicy::uniform;
  std::size_t local_epochs = 1;
  std::size_t bootstrap_epochs = 0;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  /// Reader-side augmentation of each local training set.
  std::optional<augment::AugmentConfig> augment;
  /// Initialize from a model trained centrally on a shared subset of every
  /// reader's training data instead of a random init.
  bool shared_warm_start = false;
  double warm_start_fraction = 0.1;
  std::size_t warm_start_epochs = 1;
  /// End the run after the first round whose union-test accuracy reaches
  /// this value. Values above 1 never trigger.
  double stop_at_union_accuracy = 2.0;
  /// Evaluate the averaged model after each round.
  bool track_metrics = true;
};

struct ReaderInput {
  std::uint32_t reader_id = 0;
  std::span<const datapipe::SliceExample> train;
  std::span<const datapipe::SliceExample> test;
};

struct RoundMetrics {
  std::size_t round = 0;
  /// Averaged model on each reader's test split, in reader_id order.
  std::vector<double> reader_accuracy;
  double union_accuracy = 0.0;
  /// Last local-epoch loss of each reader.
  std::vector<double> reader_loss;
};

struct FederationResult {
  std::vector<RoundMetrics> rounds;
  std::vector<float> final_weights;
  TransferStats traffic;
  /// Training-set size of each reader after augmentation, reader_id order.
  std::vector<std::size_t> train_sizes;

  /// First round whose union accuracy is >= target.
  std::optional<std::size_t> rounds_to(double target) const;
};

/// Random initial weights shared by every reader.
std::vector<float> initial_weights(const nn::ArchConfig& arch, std::uint64_t seed);

/// The RNG stream a reader trains with.
Rng reader_rng(std::uint64_t seed, std::uint32_t reader_id);

/// Local training set of a reader, augmented when `augment` is set.
std::vector<datapipe::SliceExample> reader_training_set(std::span<const datapipe::SliceExample> train,
                                                        const std::optional<augment::AugmentConfig>& augment,
                                                        std::uint32_t reader_id);

/// A reader client that trains on `train` (already augmented if wanted).
ReaderClient make_reader_client(const FederationConfig& config, std::uint32_t reader_id,
                                std::span<const datapipe::SliceExample> train);

/// Starting weights for the server: random init or the shared warm start.
std::vector<float> federation_start_weights(std::span<const ReaderInput> readers, const FederationConfig& config);

/// The full protocol with every reader in this process.
FederationResult run_federation(std::span<const ReaderInput> readers, const FederationConfig& config);

}  // namespace fedprint::fedavg
