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

#include "sigcomm/coevolution.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include "sigcomm/ctrnn.hpp"
#include "sigcomm/error.hpp"
#include "sigcomm/rng.hpp"

namespace sigcomm {

namespace {

constexpr std::uint64_t kSenderTag = 0x53454E44;    // "SEND"
constexpr std::uint64_t kReceiverTag = 0x52454356;  // "RECV"
constexpr std::uint64_t kPairTag = 0x50414952;      // "PAIR"

}  // namespace

std::vector<double> CoevolutionResult::fitness_history() const {
  std::vector<double> out;
  out.reserve(history.size());
  for (const auto& h : history) out.push_back(h.best_fitness);
  return out;
}

void assign_max_fitness(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                        std::span<double> row_max, std::span<double> col_max) {
  if (matrix.size() != rows * cols || row_max.size() != rows || col_max.size() != cols)
    throw PreconditionError("fitness matrix shape mismatch");
  std::fill(row_max.begin(), row_max.end(), -std::numeric_limits<double>::infinity());
  std::fill(col_max.begin(), col_max.end(), -std::numeric_limits<double>::infinity());
  for (std::size_t s = 0; s < rows; ++s) {
    for (std::size_t r = 0; r < cols; ++r) {
      const double f = matrix[s * cols + r];
      row_max[s] = std::max(row_max[s], f);
      col_max[r] = std::max(col_max[r], f);
    }
  }
}

std::uint64_t pair_stream_seed(std::uint64_t seed, int generation, std::uint64_t sender_key,
                               std::uint64_t receiver_key) {
  return hash_seed({kPairTag, seed, static_cast<std::uint64_t>(generation), sender_key, receiver_key});
}

GenerationEvaluation evaluate_generation(std::vector<Genome>& senders, std::vector<Genome>& receivers,
                                         const CommunicationTask& task, std::uint64_t seed, int generation,
                                         int threads) {
  if (senders.empty() || receivers.empty()) throw PreconditionError("both populations must be non-empty");
  GenerationEvaluation ev;
  ev.senders = senders.size();
  ev.receivers = receivers.size();
  ev.pair_fitness.assign(ev.senders * ev.receivers, 0.0);

  std::vector<std::vector<Signal>> signals(ev.senders);
  for (std::size_t s = 0; s < ev.senders; ++s) {
    Network net = compile(senders[s], OutputMode::kRaw);
    signals[s] = task.sender_signals(net);
  }

  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, ev.receivers);
  auto work = [&](std::size_t worker) {
    const bool noisy = task.channel().sigma > 0.0;
    Rng silent;  // never drawn from when the channel is noise-free
    for (std::size_t r = worker; r < ev.receivers; r += workers) {
      Network receiver = compile(receivers[r], task.receiver_mode());
      for (std::size_t s = 0; s < ev.senders; ++s) {
        double& slot = ev.pair_fitness[s * ev.receivers + r];
        if (noisy) {
          Rng rng(pair_stream_seed(seed, generation, senders[s].key, receivers[r].key));
          slot = task.pair_fitness(signals[s], receiver, rng);
        } else {
          slot = task.pair_fitness(signals[s], receiver, silent);
        }
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ev.sender_fitness.assign(ev.senders, 0.0);
  ev.receiver_fitness.assign(ev.receivers, 0.0);
  assign_max_fitness(ev.pair_fitness, ev.senders, ev.receivers, ev.sender_fitness, ev.receiver_fitness);
  for (std::size_t s = 0; s < ev.senders; ++s) senders[s].fitness = ev.sender_fitness[s];
  for (std::size_t r = 0; r < ev.receivers; ++r) receivers[r].fitness = ev.receiver_fitness[r];

  ev.best_fitness = ev.pair_fitness[0];
  for (std::size_t s = 0; s < ev.senders; ++s) {
    for (std::size_t r = 0; r < ev.receivers; ++r) {
      if (ev.at(s, r) > ev.best_fitness) {
        ev.best_fitness = ev.at(s, r);
        ev.best_sender = s;
        ev.best_receiver = r;
      }
    }
  }
  return ev;
}

SignalingSystem extract_signaling_system(const Genome& sender, const CommunicationTask& task) {
  Network net = compile(sender, OutputMode::kRaw);
  SignalingSystem system;
  system.vocab_size = static_cast<int>(task.all_episodes().size());
  for (const Episode& e : task.all_episodes()) system.signals.push_back(clean_signal(net, e.input, task.channel().window));
  system.provenance = task.setting().name();
  return system;
}

CoevolutionResult run_coevolution(const CoevolutionConfig& config, const CommunicationTask& task,
                                  std::uint64_t seed, const GenerationCallback& on_generation) {
  if (config.max_generations < 1) throw PreconditionError("max_generations must be positive");
  if (config.reset_after < 1) throw PreconditionError("reset_after must be positive");

  Population senders(config.neat, task.sender_layout(), hash_seed({kSenderTag, seed}));
  Population receivers(config.neat, task.receiver_layout(), hash_seed({kReceiverTag, seed}));

  CoevolutionResult result;
  bool have_best = false;
  double best_since_reset = -std::numeric_limits<double>::infinity();
  int stagnant = 0;

  for (int generation = 1; generation <= config.max_generations; ++generation) {
    const GenerationEvaluation ev =
        evaluate_generation(senders.genomes(), receivers.genomes(), task, seed, generation, config.threads);
    const Genome& gen_sender = senders.genomes()[ev.best_sender];
    const Genome& gen_receiver = receivers.genomes()[ev.best_receiver];

    if (!have_best || ev.best_fitness > result.best_pair.fitness) {
      result.best_pair = {gen_sender, gen_receiver, ev.best_fitness};
      have_best = true;
    }
    if (config.snapshot) result.snapshots.push_back(extract_signaling_system(gen_sender, task));

    GenerationRecord record{generation, ev.best_fitness, static_cast<int>(senders.species().size()),
                            static_cast<int>(receivers.species().size()), false};

    const bool converged = ev.best_fitness >= 0.0;
    if (ev.best_fitness > best_since_reset) {
      best_since_reset = ev.best_fitness;
      stagnant = 0;
    } else {
      ++stagnant;
    }

    const bool last = converged || generation == config.max_generations;
    if (!last && stagnant >= config.reset_after) {
      record.reset = true;
      result.reset_events.push_back(generation);
    }
    result.history.push_back(record);
    if (on_generation) on_generation(record);

    if (converged) {
      result.generations_to_converge = generation;
      break;
    }
    if (last) break;

    if (record.reset) {
      senders.reset();
      receivers.reset();
      best_since_reset = -std::numeric_limits<double>::infinity();
      stagnant = 0;
    } else {
      const std::uint64_t champion_s = gen_sender.key;
      const std::uint64_t champion_r = gen_receiver.key;
      senders.advance(champion_s);
      receivers.advance(champion_r);
    }
  }

  result.final_signaling_system = extract_signaling_system(result.best_pair.sender, task);
  return result;
}

}  // namespace sigcomm
