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

#ifndef SIGCOMM_COEVOLUTION_HPP_
#define SIGCOMM_COEVOLUTION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sigcomm/analysis.hpp"
#include "sigcomm/neat.hpp"
#include "sigcomm/task.hpp"

namespace sigcomm {

struct CoevolutionConfig {
  NeatConfig neat;
  int max_generations = 10000;
  // Both populations are re-initialized after this many consecutive
  // generations without a strict improvement of the best pair fitness.
  int reset_after = 50;
  // Worker threads for pair evaluation. Results do not depend on it.
  int threads = 1;
  // Keep the best signaling system of every generation.
  bool snapshot = false;
};

struct Pair {
  Genome sender;
  Genome receiver;
  double fitness = 0.0;
};

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  int sender_species = 0;
  int receiver_species = 0;
  bool reset = false;
};

struct CoevolutionResult {
  Pair best_pair;
  std::optional<int> generations_to_converge;
  std::vector<GenerationRecord> history;
  std::vector<int> reset_events;
  SignalingSystem final_signaling_system;
  std::vector<SignalingSystem> snapshots;  // one per generation when requested

  std::vector<double> fitness_history() const;
};

struct GenerationEvaluation {
  std::size_t senders = 0;
  std::size_t receivers = 0;
  std::vector<double> pair_fitness;  // row-major, senders x receivers
  std::vector<double> sender_fitness;
  std::vector<double> receiver_fitness;
  std::size_t best_sender = 0;
  std::size_t best_receiver = 0;
  double best_fitness = 0.0;

  double at(std::size_t s, std::size_t r) const { return pair_fitness[s * receivers + r]; }
};

// Row and column maxima of a senders x receivers fitness matrix: every genome
// takes the best fitness among the pairs it took part in.
void assign_max_fitness(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                        std::span<double> row_max, std::span<double> col_max);

// Seed of the noise stream for one pair in one generation.
std::uint64_t pair_stream_seed(std::uint64_t seed, int generation, std::uint64_t sender_key,
                               std::uint64_t receiver_key);

// Evaluates the full Cartesian product once and stores each genome's fitness.
GenerationEvaluation evaluate_generation(std::vector<Genome>& senders, std::vector<Genome>& receivers,
                                         const CommunicationTask& task, std::uint64_t seed, int generation,
                                         int threads = 1);

// Noise-free signal of `sender` for every concept (or object) of the task.
SignalingSystem extract_signaling_system(const Genome& sender, const CommunicationTask& task);

using GenerationCallback = std::function<void(const GenerationRecord&)>;

// Lock-step co-evolution of a sender and a receiver population. Stops at the
// first zero-fitness pair or after max_generations.
CoevolutionResult run_coevolution(const CoevolutionConfig& config, const CommunicationTask& task,
                                  std::uint64_t seed, const GenerationCallback& on_generation = {});

}  // namespace sigcomm

#endif  // SIGCOMM_COEVOLUTION_HPP_
