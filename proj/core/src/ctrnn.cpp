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

#include "sigcomm/ctrnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "sigcomm/error.hpp"

namespace sigcomm {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double apply_activation(Activation a, double x) {
  return a == Activation::kSigmoid ? logistic(x) : x;
}

void softmax(std::span<const double> values, std::span<double> out) {
  if (values.empty()) return;
  const double peak = *std::max_element(values.begin(), values.end());
  double total = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    out[k] = std::exp(values[k] - peak);
    total += out[k];
  }
  for (std::size_t k = 0; k < values.size(); ++k) out[k] /= total;
}

Network::Network(std::vector<Neuron> neurons, std::vector<Connection> connections, OutputMode mode)
    : neurons_(std::move(neurons)), connections_(std::move(connections)), mode_(mode) {
  const std::size_t n = neurons_.size();
  std::unordered_map<int, std::size_t> index_of;
  index_of.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Neuron& u = neurons_[i];
    if (!index_of.emplace(u.id, i).second)
      throw StructuralError("duplicate neuron id " + std::to_string(u.id));
    if (!(u.time_constant >= 1.0))
      throw StructuralError("neuron " + std::to_string(u.id) + " has time constant below 1");
  }

  auto by_id = [this](std::size_t a, std::size_t b) { return neurons_[a].id < neurons_[b].id; };
  for (std::size_t i = 0; i < n; ++i) {
    if (neurons_[i].kind == NodeKind::kInput) input_index_.push_back(i);
    if (neurons_[i].kind == NodeKind::kOutput) output_index_.push_back(i);
  }
  std::sort(input_index_.begin(), input_index_.end(), by_id);
  std::sort(output_index_.begin(), output_index_.end(), by_id);

  std::vector<std::vector<std::pair<std::size_t, double>>> incoming(n);
  for (const Connection& c : connections_) {
    auto src = index_of.find(c.source);
    auto dst = index_of.find(c.target);
    if (src == index_of.end() || dst == index_of.end())
      throw StructuralError("connection " + std::to_string(c.source) + " -> " + std::to_string(c.target) +
                            " has a dangling endpoint");
    incoming[dst->second].emplace_back(src->second, c.weight);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Neuron& u = neurons_[i];
    if (u.kind == NodeKind::kInput) continue;
    const auto begin = static_cast<std::uint32_t>(incoming_source_.size());
    for (const auto& [s, w] : incoming[i]) {
      incoming_source_.push_back(static_cast<std::uint32_t>(s));
      incoming_weight_.push_back(w);
    }
    units_.push_back({static_cast<std::uint32_t>(i), begin, static_cast<std::uint32_t>(incoming_source_.size()),
                      u.activation == Activation::kSigmoid, u.bias, u.time_constant});
  }

  state_.assign(n, 0.0);
  next_.assign(n, 0.0);
  readout_.assign(output_index_.size(), 0.0);
}

void Network::advance(std::span<const double> inputs) {
  if (inputs.size() != input_index_.size())
    throw PreconditionError("expected " + std::to_string(input_index_.size()) + " inputs, got " +
                            std::to_string(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) state_[input_index_[k]] = inputs[k];

  const double* y = state_.data();
  for (const Unit& u : units_) {
    double drive = u.bias;
    for (std::uint32_t e = u.edge_begin; e < u.edge_end; ++e) drive += incoming_weight_[e] * y[incoming_source_[e]];
    const double target = u.sigmoid ? logistic(drive) : drive;
    // exact for tau == dt
    double updated = u.time_constant == 1.0 ? target : y[u.index] + (target - y[u.index]) / u.time_constant;
    if (!(std::abs(updated) <= kPotentialLimit)) {
      if (std::isnan(updated)) {
        const int id = neurons_[u.index].id;
        throw NumericOverflowError(id, "non-finite potential at neuron " + std::to_string(id));
      }
      updated = std::clamp(updated, -kPotentialLimit, kPotentialLimit);
    }
    next_[u.index] = updated;
  }
  for (const Unit& u : units_) state_[u.index] = next_[u.index];
}

std::span<const double> Network::outputs() {
  for (std::size_t k = 0; k < output_index_.size(); ++k) readout_[k] = state_[output_index_[k]];
  if (mode_ == OutputMode::kSoftmax) softmax(readout_, readout_);
  return readout_;
}

std::span<const double> Network::step(std::span<const double> inputs) {
  advance(inputs);
  return outputs();
}

std::vector<std::vector<double>> Network::activate_window(
    std::span<const std::vector<double>> input_sequence, std::size_t window, bool reset_first) {
  if (input_sequence.size() != window)
    throw PreconditionError("input sequence has " + std::to_string(input_sequence.size()) +
                            " entries but the window is " + std::to_string(window));
  if (reset_first) reset();
  std::vector<std::vector<double>> result;
  result.reserve(window);
  for (const auto& in : input_sequence) {
    auto out = step(in);
    result.emplace_back(out.begin(), out.end());
  }
  return result;
}

void Network::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

Network compile(const Genome& genome, OutputMode mode) {
  std::vector<Neuron> neurons;
  neurons.reserve(genome.nodes.size());
  for (const NodeGene& g : genome.nodes)
    neurons.push_back({g.id, g.bias, g.time_constant, g.activation, g.kind});
  std::vector<Connection> connections;
  for (const ConnectionGene& c : genome.connections)
    if (c.enabled) connections.push_back({c.source, c.target, c.weight});
  // A dangling disabled gene is still a malformed genome.
  std::unordered_set<int> known;
  for (const NodeGene& g : genome.nodes) known.insert(g.id);
  for (const ConnectionGene& c : genome.connections) {
    if (!known.contains(c.source) || !known.contains(c.target))
      throw StructuralError("connection gene " + std::to_string(c.innovation) + " has a dangling endpoint");
  }
  return Network(std::move(neurons), std::move(connections), mode);
}

}  // namespace sigcomm
