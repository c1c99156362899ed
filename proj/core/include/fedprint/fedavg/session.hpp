#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fedprint/common/rng.hpp"
#include "fedprint/datapipe/slice.hpp"
#include "fedprint/fedavg/aggregate.hpp"
#include "fedprint/fedavg/wire.hpp"
#include "fedprint/nn/model.hpp"

namespace fedprint::fedavg {

inline constexpr std::size_t kMaxBootstrapEpochs = 10;

/// A reader's local learner. `train` is borrowed and must outlive the client.
struct ReaderClient {
  std::uint32_t reader_id = 0;
  nn::Model model;
  std::span<const datapipe::SliceExample> train;
  Rng rng;
  std::size_t batch_size = 64;
  std::size_t local_epochs = 1;
  double last_loss = 0.0;

  /// Trains `epochs` passes over `train`; returns the last epoch's loss.
  double train_epochs(std::size_t epochs);
};

/// Client half of the round protocol. Each handler validates the whole frame
/// before touching the model, so a rejected frame leaves the client as it was.
class ClientSession {
 public:
  explicit ClientSession(ReaderClient& reader) : reader_(reader) {}

  /// start_round at round 0 carrying |X_r| and no payload.
  Frame join_frame() const;

  /// Handles a server frame and returns the reply, if any. Throws
  /// ProtocolError for frames that do not fit the protocol state.
  std::optional<Frame> on_frame(const Frame& frame);

  bool finished() const noexcept { return finished_; }
  ReaderClient& reader() noexcept { return reader_; }

 private:
  std::vector<float> decode_weights(const Frame& frame) const;
  Frame reply(PayloadKind kind, std::uint32_t round) const;

  ReaderClient& reader_;
  std::optional<std::uint32_t> last_round_;
  bool finished_ = false;
};

struct ServerConfig {
  nn::ArchConfig arch;
  std::size_t readers = 1;
  std::size_t rounds = 1;
  AggregationPolicy policy = AggregationPolicy::uniform;
  std::size_t bootstrap_epochs = 0;

  void validate() const;
};

struct RoundReport {
  std::size_t round = 0;
  /// Sorted by reader_id.
  std::span<const ReaderUpdate> updates;
  std::vector<double> coefficients;
  std::span<const float> averaged;
};

/// Called after each aggregation; returning false ends the run after this
/// round.
using RoundObserver = std::function<bool(const RoundReport&)>;

struct Outbound {
  std::uint32_t reader_id = 0;
  Frame frame;
};

/// Server half: join, optional single-reader bootstrap at round 0, rounds
/// 1..T, shutdown at T+1 carrying the final weights.
class ServerSession {
 public:
  enum class Phase { joining, bootstrap, round, finished };

  ServerSession(ServerConfig config, std::vector<float> initial_weights, RoundObserver observer = {});

  /// Registers a reader. Throws ProtocolError without registering on a bad
  /// hello, a duplicate reader_id or a full session.
  void on_join(const Frame& frame);
  bool ready() const noexcept { return joined_.size() == config_.readers; }

  /// First outbound batch once every reader has joined.
  std::vector<Outbound> start();

  /// Handles a client frame; returns frames to send (empty until the round's
  /// barrier is reached). Throws ProtocolError before any state change.
  std::vector<Outbound> on_message(const Frame& frame);

  Phase phase() const noexcept { return phase_; }
  std::size_t round() const noexcept { return round_; }
  std::size_t rounds_completed() const noexcept { return completed_; }
  const std::vector<float>& weights() const noexcept { return weights_; }
  const ServerConfig& config() const noexcept { return config_; }
  /// Joined reader ids, ascending.
  std::vector<std::uint32_t> readers() const;
  /// Weight payload bytes for this architecture.
  std::size_t payload_size() const noexcept { return payload_size_; }

 private:
  struct Joined {
    std::uint32_t reader_id;
    std::uint64_t example_count;
  };

  const Joined* find(std::uint32_t reader_id) const;
  std::vector<float> decode_weights(const Frame& frame) const;
  std::vector<Outbound> broadcast(PayloadKind kind, std::uint32_t round) const;

  ServerConfig config_;
  std::vector<float> weights_;
  RoundObserver observer_;
  std::size_t payload_size_;
  Phase phase_ = Phase::joining;
  std::vector<Joined> joined_;
  std::uint32_t bootstrap_reader_ = 0;
  std::size_t round_ = 0;
  std::size_t completed_ = 0;
  std::vector<ReaderUpdate> pending_;
};

}  // namespace fedprint::fedavg
