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

#include "sigcomm/neat.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "sigcomm/error.hpp"
#include "sigcomm/rng.hpp"

namespace sigcomm {
namespace {

const GenomeLayout kSender{1, 1, Activation::kIdentity, Activation::kIdentity};

std::size_t pick_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

Genome minimal(double weight = 0.5) {
  Genome g;
  g.nodes = {{0, 0.0, 1.0, Activation::kIdentity, NodeKind::kInput},
             {1, 0.0, 1.0, Activation::kIdentity, NodeKind::kOutput}};
  g.connections = {{0, 0, 1, weight, true}};
  return g;
}

std::set<std::pair<int, int>> edge_set(const Genome& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& c : g.connections) s.insert({c.source, c.target});
  return s;
}

TEST(InitialPopulation, SenderShape) {
  NeatConfig config;
  InnovationRegistry registry(kSender.first_hidden_id());
  Rng rng(1);
  const auto pop = initial_population(config, kSender, registry, rng);
  ASSERT_EQ(pop.size(), 20u);
  for (const auto& g : pop) {
    EXPECT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.connections.size(), 1u);
    EXPECT_NO_THROW(validate(g));
  }
}

TEST(InitialPopulation, ClassificationReceiverShape) {
  const GenomeLayout layout{1, 5, Activation::kSigmoid, Activation::kSigmoid};
  NeatConfig config;
  InnovationRegistry registry(layout.first_hidden_id());
  Rng rng(2);
  for (const auto& g : initial_population(config, layout, registry, rng)) {
    EXPECT_EQ(g.count(NodeKind::kInput), 1);
    EXPECT_EQ(g.count(NodeKind::kOutput), 5);
    EXPECT_EQ(g.connections.size(), 5u);
  }
}

TEST(Mutation, AddNodeSplitsConnection) {
  NeatConfig config;
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  Rng rng(3);
  Genome g = minimal(0.7);
  ASSERT_TRUE(mutate_add_node(g, config, kSender, registry, rng));
  EXPECT_EQ(g.nodes.size(), 3u);
  ASSERT_EQ(g.connections.size(), 3u);
  EXPECT_FALSE(g.find_connection(0, 1)->enabled);
  const int hidden = g.nodes.back().id;
  EXPECT_EQ(g.find_connection(0, hidden)->weight, 1.0);
  EXPECT_EQ(g.find_connection(hidden, 1)->weight, 0.7);
  EXPECT_NO_THROW(validate(g));
}

TEST(Mutation, DeleteNodeWithoutHiddenNodesIsNoOp) {
  Rng rng(4);
  Genome g = minimal();
  const Genome before = g;
  EXPECT_FALSE(mutate_delete_node(g, rng));
  EXPECT_EQ(g, before);
}

TEST(Mutation, DeleteNodeRemovesIncidentConnections) {
  NeatConfig config;
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  Rng rng(5);
  Genome g = minimal();
  ASSERT_TRUE(mutate_add_node(g, config, kSender, registry, rng));
  ASSERT_TRUE(mutate_delete_node(g, rng));
  EXPECT_EQ(g.nodes.size(), 2u);
  EXPECT_EQ(g.connections.size(), 1u);
  EXPECT_NO_THROW(validate(g));
}

TEST(Registry, SameEdgeSameInnovationInEveryOrder) {
  std::vector<std::pair<int, int>> edges = {{0, 1}, {0, 2}, {2, 1}, {1, 1}, {2, 2}};
  std::sort(edges.begin(), edges.end());
  do {
    InnovationRegistry registry(2);
    std::map<std::pair<int, int>, int> first;
    for (const auto& [s, t] : edges) first[{s, t}] = registry.connection_innovation(s, t);
    auto reversed = edges;
    std::reverse(reversed.begin(), reversed.end());
    for (const auto& [s, t] : reversed) EXPECT_EQ(registry.connection_innovation(s, t), first.at({s, t}));
    std::set<int> ids;
    for (const auto& [e, id] : first) ids.insert(id);
    EXPECT_EQ(ids.size(), edges.size());
  } while (std::next_permutation(edges.begin(), edges.end()));
}

TEST(Registry, ParallelSplitsAlign) {
  NeatConfig config;
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  Rng rng(6);
  Genome a = minimal(0.1), b = minimal(0.9);
  ASSERT_TRUE(mutate_add_node(a, config, kSender, registry, rng));
  ASSERT_TRUE(mutate_add_node(b, config, kSender, registry, rng));
  EXPECT_EQ(a.nodes.back().id, b.nodes.back().id);
  for (std::size_t i = 0; i < a.connections.size(); ++i)
    EXPECT_EQ(a.connections[i].innovation, b.connections[i].innovation);
}

TEST(Registry, TwoGenomesAddingSameConnectionShareInnovation) {
  NeatConfig config;
  config.conn_add_prob = 1.0;
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  // Each seed makes some genome add some edge; whenever two genomes hold the
  // same edge they must agree on its id.
  std::map<std::pair<int, int>, int> seen;
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    Genome g = minimal();
    mutate_add_node(g, config, kSender, registry, rng);
    for (int k = 0; k < 4; ++k) mutate_add_connection(g, config, registry, rng);
    for (const auto& c : g.connections) {
      auto [it, inserted] = seen.emplace(std::make_pair(c.source, c.target), c.innovation);
      EXPECT_EQ(it->second, c.innovation);
    }
  }
}

TEST(Crossover, SelfCrossIsStructurallyIdentical) {
  NeatConfig config;
  Rng rng(7);
  Genome g = minimal();
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  mutate_add_node(g, config, kSender, registry, rng);
  g.fitness = -1.0;
  for (int i = 0; i < 50; ++i) {
    const Genome child = crossover(g, g, config, rng);
    ASSERT_EQ(child.nodes.size(), g.nodes.size());
    ASSERT_EQ(child.connections.size(), g.connections.size());
    for (std::size_t k = 0; k < g.nodes.size(); ++k) EXPECT_EQ(child.nodes[k], g.nodes[k]);
    for (std::size_t k = 0; k < g.connections.size(); ++k) {
      EXPECT_EQ(child.connections[k].innovation, g.connections[k].innovation);
      EXPECT_EQ(child.connections[k].weight, g.connections[k].weight);
    }
  }
}

TEST(Crossover, ExcessGeneComesFromFitterParent) {
  NeatConfig config;
  InnovationRegistry registry(2);
  registry.connection_innovation(0, 1);
  Rng rng(8);
  Genome fit = minimal();
  ASSERT_TRUE(mutate_add_node(fit, config, kSender, registry, rng));
  Genome weak = minimal();
  fit.fitness = 0.0;
  weak.fitness = -3.0;
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(edge_set(crossover(fit, weak, config, rng)), edge_set(fit));
    EXPECT_EQ(edge_set(crossover(weak, fit, config, rng)), edge_set(fit));
  }
}

TEST(Crossover, UnevaluatedParentIsPreconditionError) {
  NeatConfig config;
  Rng rng(9);
  Genome a = minimal(), b = minimal();
  a.fitness = 0.0;
  EXPECT_THROW(crossover(a, b, config, rng), PreconditionError);
  EXPECT_THROW(crossover(b, a, config, rng), PreconditionError);
}

TEST(Crossover, RandomCrossoversPreserveInvariants) {
  NeatConfig config;
  config.conn_add_prob = 0.8;
  config.node_add_prob = 0.5;
  const GenomeLayout layout{1, 3, Activation::kSigmoid, Activation::kSigmoid};
  InnovationRegistry registry(layout.first_hidden_id());
  Rng rng(10);
  auto pool = initial_population(config, layout, registry, rng);
  for (auto& g : pool)
    for (int k = 0; k < 6; ++k) mutate(g, config, layout, registry, rng);
  for (int i = 0; i < 10000; ++i) {
    Genome a = pool[pick_index(rng, pool.size())];
    Genome b = pool[pick_index(rng, pool.size())];
    // Half the time the parents tie, so disjoint genes come from both.
    a.fitness = -static_cast<double>(i % 3);
    b.fitness = i % 2 ? *a.fitness : -1.5;
    const Genome child = crossover(a, b, config, rng);
    ASSERT_NO_THROW(validate(child));
    std::set<std::pair<int, int>> pairs;
    for (const auto& c : child.connections) ASSERT_TRUE(pairs.insert({c.source, c.target}).second);
    if (i % 50 == 0) pool[pick_index(rng, pool.size())] = child;
  }
}

TEST(Compatibility, IdenticalGenomesAreAtZero) {
  NeatConfig config;
  EXPECT_EQ(compatibility_distance(minimal(), minimal(), config), 0.0);
}

TEST(Compatibility, UniformWeightShiftCostsC3) {
  NeatConfig config;
  Genome a = minimal(0.2), b = minimal(1.2);
  EXPECT_DOUBLE_EQ(compatibility_distance(a, b, config), config.weight_coefficient * 1.0);
}

TEST(Compatibility, SymmetricOverRandomPairs) {
  NeatConfig config;
  config.node_add_prob = 0.5;
  const GenomeLayout layout{1, 2, Activation::kIdentity, Activation::kIdentity};
  InnovationRegistry registry(layout.first_hidden_id());
  Rng rng(11);
  auto pool = initial_population(config, layout, registry, rng);
  for (auto& g : pool)
    for (int k = 0; k < 5; ++k) mutate(g, config, layout, registry, rng);
  for (const auto& a : pool)
    for (const auto& b : pool) {
      EXPECT_EQ(compatibility_distance(a, b, config), compatibility_distance(b, a, config));
      EXPECT_GE(compatibility_distance(a, b, config), 0.0);
    }
}

std::vector<Genome> keyed(std::vector<Genome> pop) {
  std::uint64_t k = 1;
  for (auto& g : pop) g.key = k++;
  return pop;
}

TEST(Speciate, IdenticalPopulationFormsOneSpecies) {
  NeatConfig config;
  int next_id = 1;
  const auto pop = keyed(std::vector<Genome>(20, minimal()));
  const auto species = speciate(pop, {}, config, next_id);
  ASSERT_EQ(species.size(), 1u);
  EXPECT_EQ(species[0].members.size(), 20u);
}

TEST(Speciate, DistantSubpopulationsFormTwoSpecies) {
  NeatConfig config;
  std::vector<Genome> pop(10, minimal(0.0));
  Genome far;
  far.nodes = minimal().nodes;
  far.nodes.push_back({2, 0.0, 1.0, Activation::kIdentity, NodeKind::kHidden});
  far.connections = {{0, 0, 1, 10.0, true}, {5, 0, 2, 0.0, true}, {6, 2, 1, 0.0, true}, {7, 2, 2, 0.0, true}};
  for (int i = 0; i < 10; ++i) pop.push_back(far);
  pop = keyed(pop);
  ASSERT_GT(compatibility_distance(pop.front(), pop.back(), config), config.compatibility_threshold);
  int next_id = 1;
  const auto species = speciate(pop, {}, config, next_id);
  ASSERT_EQ(species.size(), 2u);
  EXPECT_EQ(species[0].members.size(), 10u);
  EXPECT_EQ(species[1].members.size(), 10u);
}

TEST(Speciate, IsAPartition) {
  NeatConfig config;
  config.node_add_prob = 0.6;
  config.compatibility_threshold = 1.0;
  const GenomeLayout layout{1, 2, Activation::kIdentity, Activation::kIdentity};
  InnovationRegistry registry(layout.first_hidden_id());
  Rng rng(12);
  std::vector<Species> previous;
  int next_id = 1;
  for (int round = 0; round < 10; ++round) {
    auto pop = initial_population(config, layout, registry, rng);
    for (auto& g : pop)
      for (int k = 0; k < round; ++k) mutate(g, config, layout, registry, rng);
    pop = keyed(pop);
    previous = speciate(pop, previous, config, next_id);
    std::multiset<std::uint64_t> assigned;
    for (const auto& s : previous) {
      EXPECT_FALSE(s.members.empty());
      assigned.insert(s.members.begin(), s.members.end());
    }
    ASSERT_EQ(assigned.size(), pop.size());
    for (const auto& g : pop) EXPECT_EQ(assigned.count(g.key), 1u);
  }
}

TEST(Reproduce, StrictBestGenomeSurvivesUnchanged) {
  NeatConfig config;
  InnovationRegistry registry(2);
  Rng rng(13);
  auto pop = keyed(initial_population(config, kSender, registry, rng));
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i].fitness = -static_cast<double>(i + 1);
  pop[7].fitness = 0.0;
  config.compatibility_threshold = 1e9;  // a single species
  int next_id = 1;
  auto species = speciate(pop, {}, config, next_id);
  std::uint64_t next_key = 100;
  const auto result = reproduce(species, pop, config, kSender, registry, rng, next_key);
  ASSERT_EQ(result.offspring.size(), 20u);
  const auto it = std::find_if(result.offspring.begin(), result.offspring.end(),
                               [&](const Genome& g) { return g.key == pop[7].key; });
  ASSERT_NE(it, result.offspring.end());
  EXPECT_EQ(it->nodes, pop[7].nodes);
  EXPECT_EQ(it->connections, pop[7].connections);
}

TEST(Reproduce, StagnantNonBestSpeciesIsRemoved) {
  NeatConfig config;
  InnovationRegistry registry(2);
  Rng rng(14);
  auto pop = keyed(initial_population(config, kSender, registry, rng));
  for (auto& g : pop) g.fitness = -1.0;
  pop[0].fitness = 0.0;
  Species best{1, pop[0], {}, {}, std::nullopt, 0};
  Species stale{2, pop[10], {}, {}, -1.0, config.stagnation_generations - 1};
  for (std::size_t i = 0; i < 10; ++i) best.members.push_back(pop[i].key);
  for (std::size_t i = 10; i < 20; ++i) stale.members.push_back(pop[i].key);
  std::vector<Species> species = {best, stale};
  std::uint64_t next_key = 100;
  const auto result = reproduce(species, pop, config, kSender, registry, rng, next_key);
  ASSERT_EQ(species.size(), 1u);
  EXPECT_EQ(species[0].id, 1);
  EXPECT_EQ(result.offspring.size(), 20u);
  for (const auto& g : result.offspring)
    for (std::size_t i = 10; i < 20; ++i) EXPECT_NE(g.key, pop[i].key);
}

TEST(Reproduce, AllStagnantWithoutSpeciesElitismResetsPopulation) {
  NeatConfig config;
  config.elitism_species = 0;
  InnovationRegistry registry(2);
  Rng rng(15);
  auto pop = keyed(initial_population(config, kSender, registry, rng));
  for (auto& g : pop) g.fitness = -2.0;
  Species a{1, pop[0], {}, {}, 0.0, config.stagnation_generations};
  Species b{2, pop[10], {}, {}, 0.0, config.stagnation_generations};
  for (std::size_t i = 0; i < 10; ++i) a.members.push_back(pop[i].key);
  for (std::size_t i = 10; i < 20; ++i) b.members.push_back(pop[i].key);
  std::vector<Species> species = {a, b};
  std::uint64_t next_key = 100;
  const auto result = reproduce(species, pop, config, kSender, registry, rng, next_key);
  EXPECT_TRUE(result.extinct);
  EXPECT_TRUE(species.empty());
  ASSERT_EQ(result.offspring.size(), 20u);
  for (const auto& g : result.offspring) {
    EXPECT_GE(g.key, 100u);
    EXPECT_EQ(g.nodes.size(), 2u);
    EXPECT_EQ(g.connections.size(), 1u);
  }
}

TEST(Reproduce, ExtinctionWithoutResetThrows) {
  NeatConfig config;
  config.elitism_species = 0;
  config.reset_on_extinction = false;
  InnovationRegistry registry(2);
  Rng rng(16);
  auto pop = keyed(initial_population(config, kSender, registry, rng));
  for (auto& g : pop) g.fitness = -2.0;
  Species a{1, pop[0], {}, {}, 0.0, config.stagnation_generations};
  for (const auto& g : pop) a.members.push_back(g.key);
  std::vector<Species> species = {a};
  std::uint64_t next_key = 100;
  EXPECT_THROW(reproduce(species, pop, config, kSender, registry, rng, next_key), Error);
}

TEST(Reproduce, UnevaluatedGenomeIsPreconditionError) {
  NeatConfig config;
  InnovationRegistry registry(2);
  Rng rng(17);
  auto pop = keyed(initial_population(config, kSender, registry, rng));
  int next_id = 1;
  auto species = speciate(pop, {}, config, next_id);
  std::uint64_t next_key = 100;
  EXPECT_THROW(reproduce(species, pop, config, kSender, registry, rng, next_key), PreconditionError);
}

// Deterministic toy objective on the weights, so selection pressure exists.
double toy_fitness(const Genome& g) {
  double s = 0.0;
  for (const auto& c : g.connections)
    if (c.enabled) s += c.weight;
  return -std::abs(s - 3.0) - 0.01 * static_cast<double>(g.nodes.size());
}

TEST(PopulationProperty, SizeInnovationAndElitismHoldOverGenerations) {
  NeatConfig config;
  const GenomeLayout layout{1, 2, Activation::kSigmoid, Activation::kSigmoid};
  Population pop(config, layout, 99);
  double last_best = -1e300;
  for (int gen = 0; gen < 150; ++gen) {
    ASSERT_EQ(pop.genomes().size(), static_cast<std::size_t>(config.population_size));
    std::uint64_t best_key = 0;
    double best = -1e300;
    for (auto& g : pop.genomes()) {
      ASSERT_NO_THROW(validate(g));
      g.fitness = toy_fitness(g);
      if (*g.fitness > best) best = *g.fitness, best_key = g.key;
    }
    EXPECT_GE(best, last_best) << "generation " << gen;
    last_best = best;
    const bool extinct = pop.advance(best_key);
    ASSERT_FALSE(extinct);
  }
  std::map<std::pair<int, int>, int> inverse;
  for (const auto& [innovation, edge] : pop.registry().edges()) {
    auto [it, inserted] = inverse.emplace(edge, innovation);
    EXPECT_TRUE(inserted) << "edge mapped to two innovation ids";
  }
}

TEST(PopulationProperty, SameSeedSameTrajectory) {
  NeatConfig config;
  const GenomeLayout layout{1, 3, Activation::kIdentity, Activation::kIdentity};
  Population a(config, layout, 5), b(config, layout, 5);
  for (int gen = 0; gen < 30; ++gen) {
    ASSERT_EQ(a.genomes(), b.genomes());
    for (auto* p : {&a, &b})
      for (auto& g : p->genomes()) g.fitness = toy_fitness(g);
    a.advance();
    b.advance();
  }
  EXPECT_EQ(a.genomes(), b.genomes());
}

TEST(MutationProperty, RandomMutationsPreserveInvariants) {
  NeatConfig config;
  config.conn_add_prob = 0.9;
  config.node_add_prob = 0.6;
  config.node_delete_prob = 0.4;
  const GenomeLayout layout{3, 4, Activation::kSigmoid, Activation::kSigmoid};
  InnovationRegistry registry(layout.first_hidden_id());
  Rng rng(18);
  auto pop = initial_population(config, layout, registry, rng);
  for (int step = 0; step < 3000; ++step) {
    Genome& g = pop[pick_index(rng, pop.size())];
    mutate(g, config, layout, registry, rng);
    ASSERT_NO_THROW(validate(g));
    EXPECT_EQ(g.count(NodeKind::kInput), 3);
    EXPECT_EQ(g.count(NodeKind::kOutput), 4);
    for (const auto& n : g.nodes) EXPECT_GE(n.time_constant, 1.0);
    for (const auto& c : g.connections) {
      EXPECT_GE(c.weight, config.weight_min);
      EXPECT_LE(c.weight, config.weight_max);
    }
  }
}

TEST(Config, RejectsOutOfRangeValues) {
  NeatConfig config;
  config.conn_add_prob = 1.5;
  EXPECT_THROW(config.validate(), PreconditionError);
  config = NeatConfig{};
  config.population_size = 1;
  EXPECT_THROW(config.validate(), PreconditionError);
}

}  // namespace
}  // namespace sigcomm
