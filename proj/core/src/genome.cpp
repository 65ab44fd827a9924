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

#include "sigcomm/genome.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "sigcomm/error.hpp"

namespace sigcomm {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kInput: return "input";
    case NodeKind::kHidden: return "hidden";
    case NodeKind::kOutput: return "output";
  }
  return "?";
}

Activation parse_activation(std::string_view text) {
  if (text == "identity") return Activation::kIdentity;
  if (text == "sigmoid") return Activation::kSigmoid;
  throw FormatError("unknown activation '" + std::string(text) + "'");
}

NodeKind parse_node_kind(std::string_view text) {
  if (text == "input") return NodeKind::kInput;
  if (text == "hidden") return NodeKind::kHidden;
  if (text == "output") return NodeKind::kOutput;
  throw FormatError("unknown node kind '" + std::string(text) + "'");
}

const NodeGene* Genome::find_node(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeGene& n, int v) { return n.id < v; });
  return (it != nodes.end() && it->id == id) ? &*it : nullptr;
}

NodeGene* Genome::find_node(int id) {
  return const_cast<NodeGene*>(std::as_const(*this).find_node(id));
}

const ConnectionGene* Genome::find_connection(int source, int target) const {
  for (const auto& c : connections)
    if (c.source == source && c.target == target) return &c;
  return nullptr;
}

ConnectionGene* Genome::find_connection(int source, int target) {
  return const_cast<ConnectionGene*>(std::as_const(*this).find_connection(source, target));
}

int Genome::count(NodeKind kind) const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [kind](const NodeGene& n) { return n.kind == kind; }));
}

int Genome::enabled_connection_count() const {
  return static_cast<int>(std::count_if(connections.begin(), connections.end(),
                                        [](const ConnectionGene& c) { return c.enabled; }));
}

void Genome::canonicalize() {
  std::sort(nodes.begin(), nodes.end(), [](const NodeGene& a, const NodeGene& b) { return a.id < b.id; });
  std::sort(connections.begin(), connections.end(),
            [](const ConnectionGene& a, const ConnectionGene& b) { return a.innovation < b.innovation; });
}

void validate(const Genome& genome) {
  for (std::size_t i = 1; i < genome.nodes.size(); ++i) {
    if (genome.nodes[i - 1].id >= genome.nodes[i].id)
      throw StructuralError("node ids must be unique and sorted (id " +
                            std::to_string(genome.nodes[i].id) + ")");
  }
  for (const auto& n : genome.nodes) {
    if (!(n.time_constant >= 1.0))
      throw StructuralError("node " + std::to_string(n.id) + " has time constant below 1");
  }
  std::set<std::pair<int, int>> edges;
  std::set<int> innovations;
  for (const auto& c : genome.connections) {
    const NodeGene* src = genome.find_node(c.source);
    const NodeGene* dst = genome.find_node(c.target);
    if (src == nullptr || dst == nullptr)
      throw StructuralError("connection " + std::to_string(c.innovation) + " has a dangling endpoint (" +
                            std::to_string(c.source) + " -> " + std::to_string(c.target) + ")");
    if (dst->kind == NodeKind::kInput)
      throw StructuralError("connection " + std::to_string(c.innovation) + " targets input node " +
                            std::to_string(c.target));
    if (!edges.emplace(c.source, c.target).second)
      throw StructuralError("duplicate connection " + std::to_string(c.source) + " -> " +
                            std::to_string(c.target));
    if (!innovations.insert(c.innovation).second)
      throw StructuralError("duplicate innovation " + std::to_string(c.innovation));
  }
}

}  // namespace sigcomm
