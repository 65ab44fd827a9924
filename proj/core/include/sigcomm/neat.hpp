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

#ifndef SIGCOMM_NEAT_HPP_
#define SIGCOMM_NEAT_HPP_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "sigcomm/genome.hpp"
#include "sigcomm/rng.hpp"

namespace sigcomm {

// NEAT hyperparameters. The first block mirrors the common experiment
// settings; the rest are the usual NEAT defaults and can be overridden from
// the experiment config file.
struct NeatConfig {
  int population_size = 20;
  double conn_add_prob = 0.5;
  double conn_delete_prob = 0.5;
  double node_add_prob = 0.2;
  double node_delete_prob = 0.2;
  int elitism_species = 1;
  int elitism_individual = 1;
  int stagnation_generations = 50;
  bool reset_on_extinction = true;
  bool recurrent_allowed = true;

  double compatibility_threshold = 3.0;
  double disjoint_coefficient = 1.0;  // c1
  double weight_coefficient = 0.5;    // c3

  double weight_init_mean = 0.0;
  double weight_init_stdev = 1.0;
  double weight_min = -30.0;
  double weight_max = 30.0;
  double weight_mutate_rate = 0.8;
  double weight_mutate_power = 0.5;
  double weight_replace_rate = 0.1;

  double bias_init_mean = 0.0;
  double bias_init_stdev = 1.0;
  double bias_min = -30.0;
  double bias_max = 30.0;
  double bias_mutate_rate = 0.8;
  double bias_mutate_power = 0.5;
  double bias_replace_rate = 0.1;

  double time_constant_init = 1.0;
  double time_constant_mutate_rate = 0.1;
  double time_constant_mutate_power = 0.2;
  double time_constant_min = 1.0;

  double survival_threshold = 0.2;
  double crossover_rate = 0.75;
  double disabled_inherit_prob = 0.75;

  // Throws PreconditionError on out-of-range values.
  void validate() const;

  friend bool operator==(const NeatConfig&, const NeatConfig&) = default;
};

// Fixed input/output structure of every genome in one population.
struct GenomeLayout {
  int inputs = 1;
  int outputs = 1;
  Activation output_activation = Activation::kIdentity;
  Activation hidden_activation = Activation::kIdentity;

  int first_hidden_id() const { return inputs + outputs; }
};

// Hands out innovation numbers keyed by (source, target) and node ids keyed by
// the innovation of the connection being split. One registry per population
// per run; id allocation is serialized.
class InnovationRegistry {
 public:
  explicit InnovationRegistry(int first_hidden_id);

  int connection_innovation(int source, int target);
  int split_node_id(int innovation);

  // innovation -> (source, target), for consistency checks.
  std::map<int, std::pair<int, int>> edges() const;

 private:
  mutable std::mutex mu_;
  std::map<std::pair<int, int>, int> innovation_of_;
  std::map<int, int> split_node_of_;
  int next_innovation_ = 0;
  int next_node_id_;
};

// Minimal genomes: only input and output nodes, fully connected
// input -> output, randomized weights and biases. Keys are left at 0.
std::vector<Genome> initial_population(const NeatConfig& config, const GenomeLayout& layout,
                                       InnovationRegistry& registry, Rng& rng);

// Individual structural operators. Each returns false when not applicable.
bool mutate_add_connection(Genome& g, const NeatConfig& config, InnovationRegistry& registry, Rng& rng);
bool mutate_delete_connection(Genome& g, Rng& rng);
bool mutate_add_node(Genome& g, const NeatConfig& config, const GenomeLayout& layout,
                     InnovationRegistry& registry, Rng& rng);
bool mutate_delete_node(Genome& g, Rng& rng);
void mutate_parameters(Genome& g, const NeatConfig& config, Rng& rng);

// Structural mutations with their configured probabilities, then parametric
// perturbation of weights, biases and time constants.
void mutate(Genome& g, const NeatConfig& config, const GenomeLayout& layout,
            InnovationRegistry& registry, Rng& rng);

// Both parents must carry a fitness. Matching genes take attributes from a
// random parent; disjoint and excess genes come from the fitter parent, or
// from both when fitness ties.
Genome crossover(const Genome& parent_a, const Genome& parent_b, const NeatConfig& config, Rng& rng);

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& config);

struct Species {
  int id = 0;
  Genome representative;
  std::vector<std::uint64_t> members;  // genome keys
  std::vector<double> best_fitness_history;
  std::optional<double> best_fitness;
  int generations_since_improvement = 0;
};

// Assigns every genome to the first species whose representative lies within
// the compatibility threshold, creating species as needed. Empty species are
// dropped and representatives are refreshed from the current members.
std::vector<Species> speciate(const std::vector<Genome>& population, std::vector<Species> previous,
                              const NeatConfig& config, int& next_species_id);

struct ReproductionResult {
  std::vector<Genome> offspring;
  bool extinct = false;  // every species was removed; offspring is a fresh population
};

// Produces the next generation. `species` is updated in place (stagnation
// bookkeeping, removal of stagnant species). `protected_key`, when present,
// wins fitness ties for the per-species elite slot and the species-elitism
// slot, so a designated champion survives unchanged.
ReproductionResult reproduce(std::vector<Species>& species, const std::vector<Genome>& population,
                             const NeatConfig& config, const GenomeLayout& layout,
                             InnovationRegistry& registry, Rng& rng, std::uint64_t& next_key,
                             std::optional<std::uint64_t> protected_key = std::nullopt);

// One evolving NEAT population.
class Population {
 public:
  Population(NeatConfig config, GenomeLayout layout, std::uint64_t seed);

  // Replaces every genome with a fresh random one. Innovation history is kept.
  void reset();

  // reproduce() followed by speciate(). Returns true if the population went
  // extinct and was re-seeded.
  bool advance(std::optional<std::uint64_t> protected_key = std::nullopt);

  std::vector<Genome>& genomes() { return genomes_; }
  const std::vector<Genome>& genomes() const { return genomes_; }
  const std::vector<Species>& species() const { return species_; }
  const NeatConfig& config() const { return config_; }
  const GenomeLayout& layout() const { return layout_; }
  const InnovationRegistry& registry() const { return registry_; }

 private:
  NeatConfig config_;
  GenomeLayout layout_;
  InnovationRegistry registry_;
  Rng rng_;
  std::uint64_t next_key_ = 1;
  int next_species_id_ = 1;
  std::vector<Genome> genomes_;
  std::vector<Species> species_;
};

}  // namespace sigcomm

#endif  // SIGCOMM_NEAT_HPP_
