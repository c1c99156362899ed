#include <benchmark/benchmark.h>

#include <random>

#include "fedprint/fedavg.hpp"
#include "fedprint/nn.hpp"
#include "fedprint/signalgen.hpp"

using namespace fedprint;

namespace {

std::vector<float> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d;
  std::vector<float> v(n);
  for (float& x : v) x = d(rng);
  return v;
}

nn::Conv1dGeometry conv_geometry(std::size_t in_channels, std::size_t len) {
  nn::Conv1dGeometry g;
  g.batch = 16;
  g.in_channels = in_channels;
  g.in_len = len;
  g.filters = 25;
  g.kernel = 3;
  g.padding = 1;
  return g;
}

void BM_ConvForward(benchmark::State& state) {
  const auto g = conv_geometry(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto x = noise(g.input_size(), 1), w = noise(g.filter_size(), 2), b = noise(g.filters, 3);
  std::vector<float> y(g.output_size());
  for (auto _ : state) {
    nn::conv1d_forward<float>(g, x, w, b, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.batch));
}
BENCHMARK(BM_ConvForward)->Args({2, 1024})->Args({25, 512})->Args({2, 3072});

void BM_ConvBackward(benchmark::State& state) {
  const auto g = conv_geometry(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto x = noise(g.input_size(), 1), w = noise(g.filter_size(), 2), gy = noise(g.output_size(), 3);
  std::vector<float> gx(g.input_size()), gw(g.filter_size()), gb(g.filters);
  for (auto _ : state) {
    nn::conv1d_backward<float>(g, x, w, gy, gx, gw, gb);
    benchmark::DoNotOptimize(gx.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.batch));
}
BENCHMARK(BM_ConvBackward)->Args({2, 1024})->Args({25, 512})->Args({2, 3072});

void BM_TrainBatch(benchmark::State& state) {
  nn::ArchConfig arch;
  arch.num_conv_blocks = static_cast<std::uint32_t>(state.range(0));
  arch.input_len = 1024;
  nn::Model model(arch, 7);
  constexpr std::size_t kBatch = 32;
  const auto x = noise(kBatch * 2 * arch.input_len, 4);
  std::vector<std::uint32_t> y(kBatch);
  for (std::size_t i = 0; i < kBatch; ++i) y[i] = static_cast<std::uint32_t>(i % arch.num_classes);
  for (auto _ : state) benchmark::DoNotOptimize(model.train_batch(x, y));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBatch));
}
BENCHMARK(BM_TrainBatch)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const auto tags = signalgen::generate_population(1, 11);
  const auto catalog = signalgen::builtin_catalog("desk");
  const auto& scenario = catalog.find("OTA50");
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(signalgen::synthesize_communication(tags[0], scenario, k++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Synthesize);

void BM_FederatedAverage(benchmark::State& state) {
  const std::size_t readers = static_cast<std::size_t>(state.range(0));
  const std::size_t n = nn::parameter_count(nn::ArchConfig{});
  std::vector<std::vector<float>> sets;
  std::vector<std::uint64_t> counts;
  for (std::size_t r = 0; r < readers; ++r) {
    sets.push_back(noise(n, 100 + r));
    counts.push_back(1000 + 37 * r);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fedavg::federated_average(sets, counts, fedavg::AggregationPolicy::data_weighted));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(readers * n * sizeof(float)));
}
BENCHMARK(BM_FederatedAverage)->Arg(3)->Arg(10);

void BM_FrameRoundTrip(benchmark::State& state) {
  const nn::ArchConfig arch;
  fedavg::Frame frame;
  frame.kind = fedavg::PayloadKind::weights;
  frame.round = 1;
  frame.example_count = 1000;
  frame.payload = nn::encode_checkpoint(arch, noise(nn::parameter_count(arch), 5));
  for (auto _ : state) {
    const auto bytes = fedavg::encode_frame(frame);
    benchmark::DoNotOptimize(fedavg::decode_frame(bytes));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(frame.payload.size()));
}
BENCHMARK(BM_FrameRoundTrip);

}  // namespace

BENCHMARK_MAIN();
