#include "fedprint/fedavg/federation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace fedprint::fedavg {

std::optional<std::size_t> FederationResult::rounds_to(double target) const {
  for (const RoundMetrics& m : rounds) {
    if (m.union_accuracy >= target) return m.round;
  }
  return std::nullopt;
}

std::vector<float> initial_weights(const nn::ArchConfig& arch, std::uint64_t seed) {
  nn::Model m(arch, derive_seed(seed, {hash_string("federation-init")}));
  return {m.parameters().begin(), m.parameters().end()};
}

Rng reader_rng(std::uint64_t seed, std::uint32_t reader_id) {
  return make_rng(seed, {hash_string("reader"), reader_id});
}

std::vector<datapipe::SliceExample> reader_training_set(std::span<const datapipe::SliceExample> train,
                                                        const std::optional<augment::AugmentConfig>& augment,
                                                        std::uint32_t reader_id) {
  if (!augment) return {train.begin(), train.end()};
  augment::AugmentConfig cfg = *augment;
  cfg.seed = derive_seed(augment->seed, {hash_string("reader"), reader_id});
  return augment::augment_slices(train, cfg);
}

ReaderClient make_reader_client(const FederationConfig& config, std::uint32_t reader_id,
                                std::span<const datapipe::SliceExample> train) {
  return ReaderClient{reader_id,
                      nn::Model(config.arch, initial_weights(config.arch, config.seed)),
                      train,
                      reader_rng(config.seed, reader_id),
                      config.batch_size,
                      config.local_epochs,
                      0.0};
}

std::vector<float> federation_start_weights(std::span<const ReaderInput> readers, const FederationConfig& config) {
  std::vector<float> w = initial_weights(config.arch, config.seed);
  if (!config.shared_warm_start) return w;
  if (config.warm_start_fraction <= 0.0 || config.warm_start_fraction > 1.0) {
    throw std::invalid_argument("warm-start fraction must be in (0, 1]");
  }
  std::vector<datapipe::SliceExample> shared;
  for (const ReaderInput& r : readers) {
    std::vector<std::size_t> idx(r.train.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng pick = make_rng(config.seed, {hash_string("warm-start"), r.reader_id});
    std::shuffle(idx.begin(), idx.end(), pick);
    const auto keep = static_cast<std::size_t>(std::llround(config.warm_start_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < keep; ++i) shared.push_back(r.train[idx[i]]);
  }
  if (shared.empty()) throw std::invalid_argument("warm-start subset is empty");
  nn::Model central(config.arch, w);
  Rng rng = make_rng(config.seed, {hash_string("warm-start-train")});
  for (std::size_t e = 0; e < config.warm_start_epochs; ++e) nn::train_epoch(central, shared, config.batch_size, rng);
  return {central.parameters().begin(), central.parameters().end()};
}

FederationResult run_federation(std::span<const ReaderInput> readers, const FederationConfig& config) {
  if (readers.empty()) throw std::invalid_argument("federation needs at least one reader");
  std::vector<const ReaderInput*> sorted;
  for (const ReaderInput& r : readers) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->reader_id < b->reader_id; });

  FederationResult result;
  std::vector<std::vector<datapipe::SliceExample>> train_sets;
  train_sets.reserve(sorted.size());
  for (const ReaderInput* r : sorted) {
    train_sets.push_back(reader_training_set(r->train, config.augment, r->reader_id));
    if (train_sets.back().empty()) {
      throw std::invalid_argument("reader " + std::to_string(r->reader_id) + " has no training data");
    }
    result.train_sizes.push_back(train_sets.back().size());
  }
  std::vector<datapipe::SliceExample> union_test;
  for (const ReaderInput* r : sorted) union_test.insert(union_test.end(), r->test.begin(), r->test.end());

  std::vector<std::unique_ptr<ReaderClient>> clients;
  std::vector<std::unique_ptr<ClientSession>> sessions;
  std::vector<ClientSession*> session_ptrs;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    clients.push_back(std::make_unique<ReaderClient>(make_reader_client(config, sorted[i]->reader_id, train_sets[i])));
    sessions.push_back(std::make_unique<ClientSession>(*clients.back()));
    session_ptrs.push_back(sessions.back().get());
  }

  ServerConfig server_cfg{config.arch, sorted.size(), config.rounds, config.policy, config.bootstrap_epochs};
  auto observer = [&](const RoundReport& report) {
    RoundMetrics m;
    m.round = report.round;
    for (const auto& c : clients) m.reader_loss.push_back(c->last_loss);
    bool more = true;
    if (config.track_metrics) {
      const nn::Model global(config.arch, report.averaged);
      for (const ReaderInput* r : sorted) {
        m.reader_accuracy.push_back(r->test.empty() ? 0.0 : nn::evaluate(global, r->test).accuracy);
      }
      m.union_accuracy = union_test.empty() ? 0.0 : nn::evaluate(global, union_test).accuracy;
      more = m.union_accuracy < config.stop_at_union_accuracy;
    }
    result.rounds.push_back(std::move(m));
    return more;
  };
  ServerSession server(server_cfg, federation_start_weights(readers, config), observer);
  result.traffic = run_in_process(server, session_ptrs);
  result.final_weights = server.weights();
  return result;
}

}  // namespace fedprint::fedavg
