#include "fedprint/nn/trainer.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fedprint::nn {

std::vector<float> pack_batch(std::span<const datapipe::SliceExample> data, std::span<const std::size_t> indices) {
  if (indices.empty()) return {};
  const std::size_t len = data[indices[0]].length();
  std::vector<float> out(indices.size() * 2 * len);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& ex = data[indices[b]];
    if (ex.length() != len) throw ShapeError("slices in one batch must share a length");
    float* re = out.data() + b * 2 * len;
    float* im = re + len;
    for (std::size_t i = 0; i < len; ++i) {
      re[i] = ex.data[2 * i];
      im[i] = ex.data[2 * i + 1];
    }
  }
  return out;
}

namespace {

void check_dataset(const Model& model, std::span<const datapipe::SliceExample> data) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  for (const auto& ex : data) {
    if (ex.length() != model.arch().input_len) {
      throw ShapeError("slice length " + std::to_string(ex.length()) + " does not match model input_len " +
                       std::to_string(model.arch().input_len));
    }
    if (ex.label >= model.arch().num_classes) {
      throw std::out_of_range("label " + std::to_string(ex.label) + " exceeds model classes");
    }
  }
}

}  // namespace

double train_epoch(Model& model, std::span<const datapipe::SliceExample> data, std::size_t batch_size, Rng& rng) {
  check_dataset(model, data);
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  std::vector<std::uint32_t> labels;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    const std::span<const std::size_t> idx(order.data() + start, n);
    const std::vector<float> inputs = pack_batch(data, idx);
    labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = data[idx[i]].label;
    total += model.train_batch(inputs, labels) * static_cast<double>(n);
  }
  return total / static_cast<double>(data.size());
}

Evaluation evaluate(const Model& model, std::span<const datapipe::SliceExample> data) {
  check_dataset(model, data);
  const std::size_t classes = model.arch().num_classes;
  Evaluation ev;
  ev.confusion.assign(classes, std::vector<std::uint64_t>(classes, 0));
  ev.total = data.size();

  std::vector<std::uint32_t> predicted(data.size());
  constexpr std::size_t kBlock = 256;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += kBlock) {
    const std::size_t n = std::min(kBlock, data.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    const auto inputs = pack_batch(data, idx);
    model.predict(inputs, n, std::span<std::uint32_t>(predicted.data() + start, n));
  }

  std::size_t correct = 0;
  // Votes per communication, keyed by (scenario, comm_id).
  std::map<std::pair<std::string, std::uint64_t>, std::pair<std::uint32_t, std::vector<std::uint32_t>>> votes;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++ev.confusion[data[i].label][predicted[i]];
    if (predicted[i] == data[i].label) ++correct;
    auto& v = votes[{data[i].scenario_name, data[i].comm_id}];
    v.first = data[i].label;
    if (v.second.empty()) v.second.assign(classes, 0);
    ++v.second[predicted[i]];
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());

  std::size_t comm_correct = 0;
  for (const auto& [key, v] : votes) {
    const auto winner = static_cast<std::uint32_t>(std::max_element(v.second.begin(), v.second.end()) - v.second.begin());
    if (winner == v.first) ++comm_correct;
  }
  ev.comm_total = votes.size();
  ev.comm_accuracy = static_cast<double>(comm_correct) / static_cast<double>(votes.size());
  return ev;
}

FitResult fit(Model& model, std::span<const datapipe::SliceExample> train,
              std::span<const datapipe::SliceExample> validation, const FitOptions& options, Rng& rng) {
  FitResult result;
  std::vector<float> best_params(model.parameters().begin(), model.parameters().end());
  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_epoch(model, train, options.batch_size, rng);
    rec.val_accuracy = validation.empty() ? 0.0 : evaluate(model, validation).accuracy;
    result.curve.push_back(rec);
    if (rec.val_accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = rec.val_accuracy;
      result.best_epoch = epoch;
      best_params.assign(model.parameters().begin(), model.parameters().end());
    }
    if (rec.val_accuracy >= options.stop_at_val_accuracy) break;
    if (options.patience > 0 && epoch - result.best_epoch >= options.patience) break;
  }
  if (!result.curve.empty()) model.set_parameters(best_params);
  return result;
}

}  // namespace fedprint::nn
