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

#ifndef SIGCOMM_GENOME_HPP_
#define SIGCOMM_GENOME_HPP_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace sigcomm {

enum class Activation : std::uint8_t { kIdentity, kSigmoid };
enum class NodeKind : std::uint8_t { kInput, kHidden, kOutput };

const char* to_string(Activation a);
const char* to_string(NodeKind k);
Activation parse_activation(const std::string_view text);
NodeKind parse_node_kind(const std::string_view text);

struct NodeGene {
  int id = 0;
  double bias = 0.0;
  double time_constant = 1.0;
  Activation activation = Activation::kIdentity;
  NodeKind kind = NodeKind::kHidden;

  friend bool operator==(const NodeGene&, const NodeGene&) = default;
};

struct ConnectionGene {
  int innovation = 0;
  int source = 0;
  int target = 0;
  double weight = 0.0;
  bool enabled = true;

  friend bool operator==(const ConnectionGene&, const ConnectionGene&) = default;
};

// Evolvable description of one CTRNN. Nodes are kept sorted by id and
// connections by innovation number; every mutation operator restores this.
struct Genome {
  std::uint64_t key = 0;
  std::vector<NodeGene> nodes;
  std::vector<ConnectionGene> connections;
  std::optional<double> fitness;

  const NodeGene* find_node(int id) const;
  NodeGene* find_node(int id);
  const ConnectionGene* find_connection(int source, int target) const;
  ConnectionGene* find_connection(int source, int target);

  int count(NodeKind kind) const;
  int enabled_connection_count() const;

  // Restores the sorted-by-id / sorted-by-innovation layout.
  void canonicalize();

  friend bool operator==(const Genome&, const Genome&) = default;
};

// Throws StructuralError when a connection endpoint is missing, a node id or
// a (source, target) pair repeats, a connection targets an input node, or a
// time constant is below 1.
void validate(const Genome& genome);

}  // namespace sigcomm

#endif  // SIGCOMM_GENOME_HPP_
