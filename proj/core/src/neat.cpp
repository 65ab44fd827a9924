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
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_map>

#include "sigcomm/error.hpp"

namespace sigcomm {

namespace {

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double gaussian(Rng& rng, double mean, double stdev) {
  return std::normal_distribution<double>(mean, stdev)(rng);
}

std::size_t pick_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double init_weight(const NeatConfig& c, Rng& rng) {
  return std::clamp(gaussian(rng, c.weight_init_mean, c.weight_init_stdev), c.weight_min, c.weight_max);
}

double init_bias(const NeatConfig& c, Rng& rng) {
  return std::clamp(gaussian(rng, c.bias_init_mean, c.bias_init_stdev), c.bias_min, c.bias_max);
}

double perturb(double value, double rate, double power, double replace_rate, double init_mean,
               double init_stdev, double lo, double hi, Rng& rng) {
  const double r = uniform01(rng);
  if (r < rate) return std::clamp(value + gaussian(rng, 0.0, power), lo, hi);
  if (r < rate + replace_rate) return std::clamp(gaussian(rng, init_mean, init_stdev), lo, hi);
  return value;
}

// True if adding source -> target closes a directed cycle over enabled edges.
bool creates_cycle(const Genome& g, int source, int target) {
  if (source == target) return true;
  std::set<int> seen{target};
  std::deque<int> frontier{target};
  while (!frontier.empty()) {
    const int at = frontier.front();
    frontier.pop_front();
    for (const auto& c : g.connections) {
      if (!c.enabled || c.source != at) continue;
      if (c.target == source) return true;
      if (seen.insert(c.target).second) frontier.push_back(c.target);
    }
  }
  return false;
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0))
    throw PreconditionError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void NeatConfig::validate() const {
  if (population_size < 2) throw PreconditionError("population_size must be at least 2");
  check_probability(conn_add_prob, "conn_add_prob");
  check_probability(conn_delete_prob, "conn_delete_prob");
  check_probability(node_add_prob, "node_add_prob");
  check_probability(node_delete_prob, "node_delete_prob");
  check_probability(weight_mutate_rate, "weight_mutate_rate");
  check_probability(weight_replace_rate, "weight_replace_rate");
  check_probability(bias_mutate_rate, "bias_mutate_rate");
  check_probability(bias_replace_rate, "bias_replace_rate");
  check_probability(time_constant_mutate_rate, "time_constant_mutate_rate");
  check_probability(survival_threshold, "survival_threshold");
  check_probability(crossover_rate, "crossover_rate");
  check_probability(disabled_inherit_prob, "disabled_inherit_prob");
  if (elitism_species < 0 || elitism_individual < 0)
    throw PreconditionError("elitism counts must be non-negative");
  if (stagnation_generations < 1) throw PreconditionError("stagnation_generations must be positive");
  if (time_constant_min < 1.0) throw PreconditionError("time_constant_min must be at least 1");
  if (time_constant_init < time_constant_min)
    throw PreconditionError("time_constant_init is below time_constant_min");
  if (!(compatibility_threshold > 0.0)) throw PreconditionError("compatibility_threshold must be positive");
  if (weight_min > weight_max || bias_min > bias_max) throw PreconditionError("empty weight/bias range");
}

InnovationRegistry::InnovationRegistry(int first_hidden_id) : next_node_id_(first_hidden_id) {}

int InnovationRegistry::connection_innovation(int source, int target) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = innovation_of_.try_emplace({source, target}, next_innovation_);
  if (inserted) ++next_innovation_;
  return it->second;
}

int InnovationRegistry::split_node_id(int innovation) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = split_node_of_.try_emplace(innovation, next_node_id_);
  if (inserted) ++next_node_id_;
  return it->second;
}

std::map<int, std::pair<int, int>> InnovationRegistry::edges() const {
  std::lock_guard lock(mu_);
  std::map<int, std::pair<int, int>> out;
  for (const auto& [edge, id] : innovation_of_) out.emplace(id, edge);
  return out;
}

std::vector<Genome> initial_population(const NeatConfig& config, const GenomeLayout& layout,
                                       InnovationRegistry& registry, Rng& rng) {
  std::vector<Genome> population;
  population.reserve(config.population_size);
  for (int p = 0; p < config.population_size; ++p) {
    Genome g;
    for (int i = 0; i < layout.inputs; ++i)
      g.nodes.push_back({i, 0.0, 1.0, Activation::kIdentity, NodeKind::kInput});
    for (int o = 0; o < layout.outputs; ++o) {
      g.nodes.push_back({layout.inputs + o, init_bias(config, rng), config.time_constant_init,
                         layout.output_activation, NodeKind::kOutput});
    }
    for (int i = 0; i < layout.inputs; ++i) {
      for (int o = 0; o < layout.outputs; ++o) {
        const int target = layout.inputs + o;
        g.connections.push_back(
            {registry.connection_innovation(i, target), i, target, init_weight(config, rng), true});
      }
    }
    g.canonicalize();
    population.push_back(std::move(g));
  }
  return population;
}

bool mutate_add_connection(Genome& g, const NeatConfig& config, InnovationRegistry& registry, Rng& rng) {
  std::vector<int> targets;
  for (const auto& n : g.nodes)
    if (n.kind != NodeKind::kInput) targets.push_back(n.id);
  if (g.nodes.empty() || targets.empty()) return false;
  const int source = g.nodes[pick_index(rng, g.nodes.size())].id;
  const int target = targets[pick_index(rng, targets.size())];

  if (ConnectionGene* existing = g.find_connection(source, target)) {
    if (existing->enabled) return false;
    existing->enabled = true;
    return true;
  }
  if (!config.recurrent_allowed && creates_cycle(g, source, target)) return false;

  g.connections.push_back(
      {registry.connection_innovation(source, target), source, target, init_weight(config, rng), true});
  g.canonicalize();
  return true;
}

bool mutate_delete_connection(Genome& g, Rng& rng) {
  if (g.connections.empty()) return false;
  g.connections.erase(g.connections.begin() + static_cast<std::ptrdiff_t>(pick_index(rng, g.connections.size())));
  return true;
}

bool mutate_add_node(Genome& g, const NeatConfig& config, const GenomeLayout& layout,
                     InnovationRegistry& registry, Rng& rng) {
  std::vector<std::size_t> enabled;
  for (std::size_t i = 0; i < g.connections.size(); ++i)
    if (g.connections[i].enabled) enabled.push_back(i);
  if (enabled.empty()) return false;

  const ConnectionGene split = g.connections[enabled[pick_index(rng, enabled.size())]];
  const int node_id = registry.split_node_id(split.innovation);
  // The same split already happened in this lineage and the gene was re-enabled.
  if (g.find_node(node_id) != nullptr) return false;

  g.find_connection(split.source, split.target)->enabled = false;
  g.nodes.push_back({node_id, 0.0, config.time_constant_init, layout.hidden_activation, NodeKind::kHidden});
  g.connections.push_back(
      {registry.connection_innovation(split.source, node_id), split.source, node_id, 1.0, true});
  g.connections.push_back(
      {registry.connection_innovation(node_id, split.target), node_id, split.target, split.weight, true});
  g.canonicalize();
  return true;
}

bool mutate_delete_node(Genome& g, Rng& rng) {
  std::vector<int> hidden;
  for (const auto& n : g.nodes)
    if (n.kind == NodeKind::kHidden) hidden.push_back(n.id);
  if (hidden.empty()) return false;
  const int victim = hidden[pick_index(rng, hidden.size())];
  std::erase_if(g.nodes, [victim](const NodeGene& n) { return n.id == victim; });
  std::erase_if(g.connections,
                [victim](const ConnectionGene& c) { return c.source == victim || c.target == victim; });
  return true;
}

void mutate_parameters(Genome& g, const NeatConfig& c, Rng& rng) {
  for (auto& conn : g.connections) {
    conn.weight = perturb(conn.weight, c.weight_mutate_rate, c.weight_mutate_power, c.weight_replace_rate,
                          c.weight_init_mean, c.weight_init_stdev, c.weight_min, c.weight_max, rng);
  }
  for (auto& node : g.nodes) {
    if (node.kind == NodeKind::kInput) continue;
    node.bias = perturb(node.bias, c.bias_mutate_rate, c.bias_mutate_power, c.bias_replace_rate,
                        c.bias_init_mean, c.bias_init_stdev, c.bias_min, c.bias_max, rng);
    if (uniform01(rng) < c.time_constant_mutate_rate)
      node.time_constant += gaussian(rng, 0.0, c.time_constant_mutate_power);
    node.time_constant = std::max(node.time_constant, c.time_constant_min);
  }
}

void mutate(Genome& g, const NeatConfig& config, const GenomeLayout& layout, InnovationRegistry& registry,
            Rng& rng) {
  if (uniform01(rng) < config.node_add_prob) mutate_add_node(g, config, layout, registry, rng);
  if (uniform01(rng) < config.node_delete_prob) mutate_delete_node(g, rng);
  if (uniform01(rng) < config.conn_add_prob) mutate_add_connection(g, config, registry, rng);
  if (uniform01(rng) < config.conn_delete_prob) mutate_delete_connection(g, rng);
  mutate_parameters(g, config, rng);
#ifndef NDEBUG
  validate(g);
#endif
}

Genome crossover(const Genome& parent_a, const Genome& parent_b, const NeatConfig& config, Rng& rng) {
  if (!parent_a.fitness || !parent_b.fitness)
    throw PreconditionError("crossover requires evaluated parents");
  const bool tie = *parent_a.fitness == *parent_b.fitness;
  const Genome& fit = *parent_b.fitness > *parent_a.fitness ? parent_b : parent_a;
  const Genome& other = &fit == &parent_a ? parent_b : parent_a;

  auto inherit_enabled = [&](bool enabled_a, bool enabled_b) {
    if (enabled_a && enabled_b) return true;
    return !(uniform01(rng) < config.disabled_inherit_prob);
  };

  std::unordered_map<int, const ConnectionGene*> other_conn;
  for (const auto& c : other.connections) other_conn.emplace(c.innovation, &c);

  Genome child;
  for (const auto& c : fit.connections) {
    ConnectionGene gene = c;
    if (auto it = other_conn.find(c.innovation); it != other_conn.end()) {
      if (uniform01(rng) < 0.5) gene.weight = it->second->weight;
      gene.enabled = inherit_enabled(c.enabled, it->second->enabled);
    } else {
      gene.enabled = inherit_enabled(c.enabled, c.enabled);
    }
    child.connections.push_back(gene);
  }

  for (const auto& n : fit.nodes) {
    NodeGene gene = n;
    if (const NodeGene* m = other.find_node(n.id)) {
      if (uniform01(rng) < 0.5) gene.bias = m->bias;
      if (uniform01(rng) < 0.5) gene.time_constant = m->time_constant;
    }
    child.nodes.push_back(gene);
  }

  if (tie) {
    for (const auto& c : other.connections) {
      const bool known = std::any_of(child.connections.begin(), child.connections.end(),
                                     [&](const ConnectionGene& x) {
                                       return x.innovation == c.innovation ||
                                              (x.source == c.source && x.target == c.target);
                                     });
      if (known) continue;
      ConnectionGene gene = c;
      gene.enabled = inherit_enabled(c.enabled, c.enabled);
      child.connections.push_back(gene);
    }
    for (const auto& n : other.nodes)
      if (fit.find_node(n.id) == nullptr) child.nodes.push_back(n);
  }

  child.canonicalize();
  return child;
}

double compatibility_distance(const Genome& a, const Genome& b, const NeatConfig& config) {
  std::size_t i = 0, j = 0;
  int mismatched = 0;
  int matching = 0;
  double weight_diff = 0.0;
  const auto& ca = a.connections;
  const auto& cb = b.connections;
  while (i < ca.size() && j < cb.size()) {
    if (ca[i].innovation == cb[j].innovation) {
      weight_diff += std::abs(ca[i].weight - cb[j].weight);
      ++matching;
      ++i;
      ++j;
    } else if (ca[i].innovation < cb[j].innovation) {
      ++mismatched;
      ++i;
    } else {
      ++mismatched;
      ++j;
    }
  }
  mismatched += static_cast<int>((ca.size() - i) + (cb.size() - j));
  const double n = static_cast<double>(std::max<std::size_t>({ca.size(), cb.size(), 1}));
  const double mean_weight = matching > 0 ? weight_diff / matching : 0.0;
  return config.disjoint_coefficient * mismatched / n + config.weight_coefficient * mean_weight;
}

std::vector<Species> speciate(const std::vector<Genome>& population, std::vector<Species> previous,
                              const NeatConfig& config, int& next_species_id) {
  std::vector<Species> species = std::move(previous);
  for (auto& s : species) s.members.clear();
  const std::size_t carried = species.size();

  for (const Genome& g : population) {
    bool placed = false;
    for (auto& s : species) {
      if (compatibility_distance(s.representative, g, config) < config.compatibility_threshold) {
        s.members.push_back(g.key);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species fresh;
      fresh.id = next_species_id++;
      fresh.representative = g;
      fresh.members.push_back(g.key);
      species.push_back(std::move(fresh));
    }
  }

  std::unordered_map<std::uint64_t, const Genome*> by_key;
  for (const Genome& g : population) by_key.emplace(g.key, &g);
  for (std::size_t s = 0; s < carried; ++s) {
    Species& sp = species[s];
    if (sp.members.empty()) continue;
    const Genome* closest = nullptr;
    double best = 0.0;
    for (std::uint64_t key : sp.members) {
      const Genome* g = by_key.at(key);
      const double d = compatibility_distance(sp.representative, *g, config);
      if (closest == nullptr || d < best) {
        closest = g;
        best = d;
      }
    }
    sp.representative = *closest;
  }
  std::erase_if(species, [](const Species& s) { return s.members.empty(); });
  return species;
}

namespace {

// Largest-remainder apportionment of `total` seats by `weights`.
std::vector<int> apportion(int total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  std::vector<int> seats(n, 0);
  if (n == 0 || total <= 0) return seats;
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> quota(n);
  for (std::size_t i = 0; i < n; ++i)
    quota[i] = sum > 0.0 ? total * weights[i] / sum : static_cast<double>(total) / static_cast<double>(n);
  int given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    seats[i] = static_cast<int>(std::floor(quota[i]));
    given += seats[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quota[a] - seats[a] > quota[b] - seats[b];
  });
  for (std::size_t k = 0; given < total; k = (k + 1) % n, ++given) ++seats[order[k]];
  return seats;
}

}  // namespace

ReproductionResult reproduce(std::vector<Species>& species, const std::vector<Genome>& population,
                             const NeatConfig& config, const GenomeLayout& layout,
                             InnovationRegistry& registry, Rng& rng, std::uint64_t& next_key,
                             std::optional<std::uint64_t> protected_key) {
  std::unordered_map<std::uint64_t, const Genome*> by_key;
  for (const Genome& g : population) {
    if (!g.fitness) throw PreconditionError("reproduce requires every genome to be evaluated");
    by_key.emplace(g.key, &g);
  }

  struct Ranked {
    Species* species;
    double fitness;
    bool holds_protected;
  };
  std::vector<Ranked> ranked;
  for (Species& s : species) {
    double best = -std::numeric_limits<double>::infinity();
    bool holds = false;
    for (std::uint64_t key : s.members) {
      best = std::max(best, *by_key.at(key)->fitness);
      holds = holds || (protected_key && *protected_key == key);
    }
    if (!s.best_fitness || best > *s.best_fitness) {
      s.best_fitness = best;
      s.generations_since_improvement = 0;
    } else {
      ++s.generations_since_improvement;
    }
    s.best_fitness_history.push_back(best);
    ranked.push_back({&s, best, holds});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.fitness != b.fitness) return a.fitness > b.fitness;
    if (a.holds_protected != b.holds_protected) return a.holds_protected;
    return a.species->id < b.species->id;
  });

  std::vector<Ranked> survivors;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const bool exempt = static_cast<int>(r) < config.elitism_species;
    if (exempt || ranked[r].species->generations_since_improvement < config.stagnation_generations)
      survivors.push_back(ranked[r]);
  }

  ReproductionResult result;
  if (survivors.empty()) {
    if (!config.reset_on_extinction) throw Error("complete extinction with reset_on_extinction disabled");
    species.clear();
    result.extinct = true;
    result.offspring = initial_population(config, layout, registry, rng);
    for (Genome& g : result.offspring) g.key = next_key++;
    return result;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : survivors) {
    for (std::uint64_t key : r.species->members) {
      lo = std::min(lo, *by_key.at(key)->fitness);
      hi = std::max(hi, *by_key.at(key)->fitness);
    }
  }
  const double range = std::max(1.0, hi - lo);
  std::vector<double> adjusted;
  for (const auto& r : survivors) {
    double sum = 0.0;
    for (std::uint64_t key : r.species->members) sum += (*by_key.at(key)->fitness - lo) / range;
    adjusted.push_back(sum / static_cast<double>(r.species->members.size()));
  }

  const int n_species = static_cast<int>(survivors.size());
  if (n_species > config.population_size) throw Error("more species than population slots");
  int base = std::max(1, config.elitism_individual);
  if (base * n_species > config.population_size) base = 1;
  std::vector<int> spawn = apportion(config.population_size - base * n_species, adjusted);
  for (int& s : spawn) s += base;

  for (std::size_t r = 0; r < survivors.size(); ++r) {
    std::vector<const Genome*> members;
    for (std::uint64_t key : survivors[r].species->members) members.push_back(by_key.at(key));
    std::stable_sort(members.begin(), members.end(), [&](const Genome* a, const Genome* b) {
      if (*a->fitness != *b->fitness) return *a->fitness > *b->fitness;
      const bool pa = protected_key && *protected_key == a->key;
      const bool pb = protected_key && *protected_key == b->key;
      if (pa != pb) return pa;
      return a->key < b->key;
    });

    int remaining = spawn[r];
    const int elites = std::min({config.elitism_individual, remaining, static_cast<int>(members.size())});
    for (int e = 0; e < elites; ++e) {
      Genome copy = *members[e];
      copy.fitness.reset();
      result.offspring.push_back(std::move(copy));
    }
    remaining -= elites;

    std::size_t cutoff = static_cast<std::size_t>(std::ceil(config.survival_threshold * members.size()));
    cutoff = std::min(std::max<std::size_t>(cutoff, 2), members.size());
    for (int c = 0; c < remaining; ++c) {
      Genome child;
      if (uniform01(rng) < config.crossover_rate) {
        const Genome& a = *members[pick_index(rng, cutoff)];
        const Genome& b = *members[pick_index(rng, cutoff)];
        child = crossover(a, b, config, rng);
      } else {
        child = *members[pick_index(rng, cutoff)];
      }
      child.key = next_key++;
      child.fitness.reset();
      mutate(child, config, layout, registry, rng);
      result.offspring.push_back(std::move(child));
    }
  }

  std::vector<Species> kept;
  for (const auto& r : survivors) kept.push_back(std::move(*r.species));
  species = std::move(kept);
  return result;
}

Population::Population(NeatConfig config, GenomeLayout layout, std::uint64_t seed)
    : config_(std::move(config)), layout_(layout), registry_(layout.first_hidden_id()), rng_(seed) {
  config_.validate();
  if (layout_.inputs < 1 || layout_.outputs < 1)
    throw PreconditionError("a genome needs at least one input and one output");
  reset();
}

void Population::reset() {
  genomes_ = initial_population(config_, layout_, registry_, rng_);
  for (Genome& g : genomes_) g.key = next_key_++;
  species_ = speciate(genomes_, {}, config_, next_species_id_);
}

bool Population::advance(std::optional<std::uint64_t> protected_key) {
  ReproductionResult r =
      reproduce(species_, genomes_, config_, layout_, registry_, rng_, next_key_, protected_key);
  genomes_ = std::move(r.offspring);
  species_ = speciate(genomes_, std::move(species_), config_, next_species_id_);
  return r.extinct;
}

}  // namespace sigcomm
