/*
 * Copyright 2026 The SeisNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <benchmark/benchmark.h>

#include <random>

#include "seisnet/layers.hpp"
#include "seisnet/model.hpp"
#include "seisnet/runtime.hpp"

using namespace seisnet;

namespace {

FeatureMap<float> random_map(std::size_t len, std::size_t ch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.f, 1.f);
  FeatureMap<float> m(len, ch);
  for (auto& v : m.values()) v = g(rng);
  return m;
}

ConvParams<float> random_conv(std::size_t k, std::size_t ci, std::size_t co, std::size_t stride) {
  ConvParams<float> p(k, ci, co, stride);
  std::mt19937_64 rng(7);
  std::normal_distribution<float> g(0.f, 0.1f);
  for (auto& v : p.kernel) v = g(rng);
  return p;
}

// args: length, input channels
void BM_Conv3Forward(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto ci = static_cast<std::size_t>(state.range(1));
  const auto x = random_map(len, ci, 1);
  const auto p = random_conv(3, ci, 12, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conv1d_forward(x, p));
  state.counters["MACs/s"] = benchmark::Counter(
      static_cast<double>(len * ci * 12 * 3), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3Forward)->Args({1125, 24})->Args({563, 120})->Args({141, 216});

void BM_Conv3Backward(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  const auto ci = static_cast<std::size_t>(state.range(1));
  const auto x = random_map(len, ci, 1);
  const auto p = random_conv(3, ci, 12, 1);
  const auto g = random_map(len, 12, 2);
  auto grads = p.zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(conv1d_backward(g, x, p, grads));
  state.counters["MACs/s"] = benchmark::Counter(
      static_cast<double>(2 * len * ci * 12 * 3), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Conv3Backward)->Args({1125, 24})->Args({563, 120})->Args({141, 216});

void BM_MiniForward(benchmark::State& state) {
  const auto params = build_model<float>(ArchSpec::mini(), InitRule::He, 3);
  auto warm = params;
  const auto x = random_map(params.spec.input_length, 1, 4);
  forward_batch<float>({x, random_map(params.spec.input_length, 1, 5)}, warm, Mode::Train);
  for (auto _ : state) benchmark::DoNotOptimize(forward(x, warm));
}
BENCHMARK(BM_MiniForward)->Unit(benchmark::kMillisecond);

void BM_MiniTrainStep(benchmark::State& state) {
  auto params = build_model<float>(ArchSpec::mini(), InitRule::He, 3);
  const auto batch = static_cast<std::size_t>(state.range(0));
  Batch<float> xs;
  for (std::size_t i = 0; i < batch; ++i) xs.push_back(random_map(params.spec.input_length, 1, i));
  const std::vector<float> gz(batch, 0.1f);
  for (auto _ : state) {
    ForwardCache<float> cache;
    forward_batch(xs, params, Mode::Train, &cache);
    benchmark::DoNotOptimize(backward<float>(gz, cache, params));
  }
  state.counters["samples/s"] = benchmark::Counter(static_cast<double>(batch),
                                                   benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_MiniTrainStep)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char** argv) {
  seisnet::retain_freed_memory();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
