#include "fedprint/fedavg/session.hpp"

#include <algorithm>

#include "fedprint/nn/checkpoint.hpp"
#include "fedprint/nn/trainer.hpp"

namespace fedprint::fedavg {
namespace {

[[noreturn]] void unexpected(const std::string& what) { throw ProtocolError(ProtocolError::Kind::unexpected, what); }

std::vector<float> decode_payload(const Frame& frame, const nn::ArchConfig& arch) {
  nn::Checkpoint ckpt;
  try {
    ckpt = nn::decode_checkpoint(frame.payload);
  } catch (const std::exception& e) {
    throw ProtocolError(ProtocolError::Kind::bad_payload, kind_name(frame.kind) + " payload: " + e.what());
  }
  if (!(ckpt.arch == arch)) {
    throw ProtocolError(ProtocolError::Kind::bad_payload,
                        kind_name(frame.kind) + " payload architecture differs from the session's");
  }
  return std::move(ckpt.params);
}

}  // namespace

double ReaderClient::train_epochs(std::size_t epochs) {
  for (std::size_t e = 0; e < epochs; ++e) last_loss = nn::train_epoch(model, train, batch_size, rng);
  return last_loss;
}

Frame ClientSession::join_frame() const {
  Frame f;
  f.kind = PayloadKind::start_round;
  f.round = 0;
  f.reader_id = reader_.reader_id;
  f.example_count = reader_.train.size();
  return f;
}

std::vector<float> ClientSession::decode_weights(const Frame& frame) const {
  return decode_payload(frame, reader_.model.arch());
}

Frame ClientSession::reply(PayloadKind kind, std::uint32_t round) const {
  Frame f;
  f.kind = kind;
  f.round = round;
  f.reader_id = reader_.reader_id;
  f.example_count = reader_.train.size();
  f.payload = reader_.model.checkpoint_bytes();
  return f;
}

std::optional<Frame> ClientSession::on_frame(const Frame& frame) {
  if (finished_) unexpected("frame after shutdown");
  if (frame.reader_id != kAllReaders) unexpected("server frame must address all readers");
  if (last_round_ && frame.round <= *last_round_) {
    unexpected("round " + std::to_string(frame.round) + " does not follow round " + std::to_string(*last_round_));
  }
  switch (frame.kind) {
    case PayloadKind::bootstrap_weights: {
      if (frame.round != 0) unexpected("bootstrap request outside round 0");
      if (frame.example_count == 0 || frame.example_count > kMaxBootstrapEpochs) {
        throw ProtocolError(ProtocolError::Kind::bad_payload,
                            "bootstrap epoch count " + std::to_string(frame.example_count) + " outside 1.." +
                                std::to_string(kMaxBootstrapEpochs));
      }
      std::vector<float> w = decode_weights(frame);
      last_round_ = frame.round;
      reader_.model.set_parameters(w);
      reader_.train_epochs(frame.example_count);
      return reply(PayloadKind::bootstrap_weights, frame.round);
    }
    case PayloadKind::start_round: {
      if (frame.round == 0) unexpected("start_round at round 0");
      std::vector<float> w = decode_weights(frame);
      last_round_ = frame.round;
      reader_.model.set_parameters(w);
      reader_.train_epochs(reader_.local_epochs);
      return reply(PayloadKind::weights, frame.round);
    }
    case PayloadKind::shutdown: {
      std::vector<float> w = decode_weights(frame);
      last_round_ = frame.round;
      reader_.model.set_parameters(w);
      finished_ = true;
      return std::nullopt;
    }
    case PayloadKind::weights:
      break;
  }
  unexpected("client received a " + kind_name(frame.kind) + " frame");
}

void ServerConfig::validate() const {
  arch.validate();
  if (readers < 1) throw std::invalid_argument("server needs at least one reader");
  if (rounds < 1) throw std::invalid_argument("server needs at least one round");
  if (bootstrap_epochs > kMaxBootstrapEpochs) {
    throw std::invalid_argument("bootstrap epochs " + std::to_string(bootstrap_epochs) + " exceed " +
                                std::to_string(kMaxBootstrapEpochs));
  }
}

ServerSession::ServerSession(ServerConfig config, std::vector<float> initial_weights, RoundObserver observer)
    : config_(std::move(config)),
      weights_(std::move(initial_weights)),
      observer_(std::move(observer)),
      payload_size_(nn::checkpoint_size(config_.arch)) {
  config_.validate();
  if (weights_.size() != nn::parameter_count(config_.arch)) {
    throw std::invalid_argument("initial weights do not match the architecture");
  }
}

const ServerSession::Joined* ServerSession::find(std::uint32_t reader_id) const {
  for (const Joined& j : joined_) {
    if (j.reader_id == reader_id) return &j;
  }
  return nullptr;
}

std::vector<std::uint32_t> ServerSession::readers() const {
  std::vector<std::uint32_t> ids;
  for (const Joined& j : joined_) ids.push_back(j.reader_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<float> ServerSession::decode_weights(const Frame& frame) const {
  if (frame.payload.size() != payload_size_) {
    throw ProtocolError(ProtocolError::Kind::bad_payload, "payload of " + std::to_string(frame.payload.size()) +
                                                              " bytes, expected " + std::to_string(payload_size_));
  }
  return decode_payload(frame, config_.arch);
}

void ServerSession::on_join(const Frame& frame) {
  if (phase_ != Phase::joining) unexpected("join after the session started");
  if (frame.kind != PayloadKind::start_round || frame.round != 0) {
    unexpected("hello must be start_round at round 0, got " + kind_name(frame.kind) + " at round " +
               std::to_string(frame.round));
  }
  if (!frame.payload.empty()) unexpected("hello carries a payload");
  if (frame.reader_id == kAllReaders) unexpected("reserved reader_id in hello");
  if (frame.example_count == 0) unexpected("reader " + std::to_string(frame.reader_id) + " has no examples");
  if (find(frame.reader_id)) unexpected("reader " + std::to_string(frame.reader_id) + " already joined");
  if (ready()) unexpected("session already has " + std::to_string(config_.readers) + " readers");
  joined_.push_back({frame.reader_id, frame.example_count});
}

std::vector<Outbound> ServerSession::broadcast(PayloadKind kind, std::uint32_t round) const {
  Frame f;
  f.kind = kind;
  f.round = round;
  f.reader_id = kAllReaders;
  f.payload = nn::encode_checkpoint(config_.arch, weights_);
  std::vector<Outbound> out;
  for (std::uint32_t id : readers()) out.push_back({id, f});
  return out;
}

std::vector<Outbound> ServerSession::start() {
  if (phase_ != Phase::joining) throw std::logic_error("session already started");
  if (!ready()) throw std::logic_error("not every reader has joined");
  if (config_.bootstrap_epochs > 0) {
    phase_ = Phase::bootstrap;
    bootstrap_reader_ = readers().front();
    Frame f;
    f.kind = PayloadKind::bootstrap_weights;
    f.round = 0;
    f.reader_id = kAllReaders;
    f.example_count = config_.bootstrap_epochs;
    f.payload = nn::encode_checkpoint(config_.arch, weights_);
    return {{bootstrap_reader_, std::move(f)}};
  }
  phase_ = Phase::round;
  round_ = 1;
  return broadcast(PayloadKind::start_round, 1);
}

std::vector<Outbound> ServerSession::on_message(const Frame& frame) {
  switch (phase_) {
    case Phase::joining:
      unexpected("message before the session started");
    case Phase::finished:
      unexpected("message after shutdown");
    case Phase::bootstrap: {
      if (frame.kind != PayloadKind::bootstrap_weights || frame.round != 0) {
        unexpected("expected bootstrap_weights at round 0, got " + kind_name(frame.kind) + " at round " +
                   std::to_string(frame.round));
      }
      if (frame.reader_id != bootstrap_reader_) {
        unexpected("bootstrap reply from reader " + std::to_string(frame.reader_id) + ", expected " +
                   std::to_string(bootstrap_reader_));
      }
      std::vector<float> w = decode_weights(frame);
      weights_ = std::move(w);
      phase_ = Phase::round;
      round_ = 1;
      return broadcast(PayloadKind::start_round, 1);
    }
    case Phase::round:
      break;
  }
  if (frame.kind != PayloadKind::weights) unexpected("expected weights, got " + kind_name(frame.kind));
  if (frame.round != round_) {
    unexpected("weights for round " + std::to_string(frame.round) + " during round " + std::to_string(round_));
  }
  const Joined* who = find(frame.reader_id);
  if (!who) unexpected("weights from unknown reader " + std::to_string(frame.reader_id));
  if (frame.example_count != who->example_count) {
    unexpected("reader " + std::to_string(frame.reader_id) + " changed its example count");
  }
  for (const ReaderUpdate& u : pending_) {
    if (u.reader_id == frame.reader_id) unexpected("duplicate weights from reader " + std::to_string(frame.reader_id));
  }
  std::vector<float> w = decode_weights(frame);
  pending_.push_back({frame.reader_id, frame.example_count, std::move(w)});
  if (pending_.size() < config_.readers) return {};

  std::sort(pending_.begin(), pending_.end(), [](const auto& a, const auto& b) { return a.reader_id < b.reader_id; });
  weights_ = federated_average(pending_, config_.policy);
  completed_ = round_;
  bool more = round_ < config_.rounds;
  if (observer_) {
    std::vector<std::uint64_t> counts;
    for (const ReaderUpdate& u : pending_) counts.push_back(u.example_count);
    RoundReport report{round_, pending_, aggregation_coefficients(counts, config_.policy), weights_};
    if (!observer_(report)) more = false;
  }
  pending_.clear();
  ++round_;
  if (more) return broadcast(PayloadKind::start_round, static_cast<std::uint32_t>(round_));
  phase_ = Phase::finished;
  return broadcast(PayloadKind::shutdown, static_cast<std::uint32_t>(round_));
}

}  // namespace fedprint::fedavg
