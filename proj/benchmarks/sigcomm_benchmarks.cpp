// Copyright 2026 The sigcomm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "sigcomm/analysis.hpp"
#include "sigcomm/coevolution.hpp"
#include "sigcomm/ctrnn.hpp"
#include "sigcomm/neat.hpp"
#include "sigcomm/task.hpp"

namespace {

using namespace sigcomm;

// Dense recurrent network with `hidden` sigmoid units and five outputs.
Network dense_network(int hidden) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> w(0.0, 1.0);
  std::vector<Neuron> neurons{{0, 0.0, 1.0, Activation::kIdentity, NodeKind::kInput}};
  int id = 1;
  for (int i = 0; i < 5; ++i) neurons.push_back({id++, w(gen), 1.5, Activation::kSigmoid, NodeKind::kOutput});
  for (int i = 0; i < hidden; ++i) neurons.push_back({id++, w(gen), 2.0, Activation::kSigmoid, NodeKind::kHidden});
  std::vector<Connection> connections;
  for (int s = 0; s < id; ++s)
    for (int t = 1; t < id; ++t) connections.push_back({s, t, 0.3 * w(gen)});
  return Network(std::move(neurons), std::move(connections), OutputMode::kSoftmax);
}

void BM_NetworkStep(benchmark::State& state) {
  Network net = dense_network(static_cast<int>(state.range(0)));
  const std::vector<double> x{0.4};
  for (auto _ : state) benchmark::DoNotOptimize(net.step(x).data());
}
BENCHMARK(BM_NetworkStep)->Arg(0)->Arg(4)->Arg(16);

void BM_EvaluateGeneration(benchmark::State& state) {
  const Setting setting = all_settings()[static_cast<std::size_t>(state.range(0))];
  const auto task = make_symbolic_task(setting, Vocabulary{5}, Channel{0.1}, 1);
  Population senders(NeatConfig{}, task.sender_layout(), 1);
  Population receivers(NeatConfig{}, task.receiver_layout(), 2);
  int generation = 0;
  for (auto _ : state) {
    const auto ev = evaluate_generation(senders.genomes(), receivers.genomes(), task, 7, ++generation);
    benchmark::DoNotOptimize(ev.best_fitness);
  }
  state.SetLabel(setting.name());
}
BENCHMARK(BM_EvaluateGeneration)->DenseRange(0, 3);

void BM_Optics(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> points(static_cast<std::size_t>(state.range(0)), std::vector<double>(50));
  for (auto& p : points)
    for (double& v : p) v = n(gen);
  for (auto _ : state) {
    const auto r = optics(points, 4);
    const auto xi = extract_clusters_xi(r.ordering, r.reachability, 0.1, 4, 0, false, r.predecessor);
    benchmark::DoNotOptimize(xi.labels.data());
  }
}
BENCHMARK(BM_Optics)->Arg(60)->Arg(240);

}  // namespace

BENCHMARK_MAIN();
