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

#ifndef SIGCOMM_CTRNN_HPP_
#define SIGCOMM_CTRNN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sigcomm/genome.hpp"

namespace sigcomm {

// Potentials are clamped to this magnitude before the finiteness check, so an
// identity-activated network can grow large but never silently overflow.
inline constexpr double kPotentialLimit = 1e6;

enum class OutputMode : std::uint8_t { kRaw, kSoftmax };

struct Neuron {
  int id = 0;
  double bias = 0.0;
  double time_constant = 1.0;
  Activation activation = Activation::kIdentity;
  NodeKind kind = NodeKind::kHidden;
};

struct Connection {
  int source = 0;
  int target = 0;
  double weight = 0.0;
};

double logistic(double x);
double apply_activation(Activation a, double x);

// Numerically stable softmax; result sums to 1.
void softmax(std::span<const double> values, std::span<double> out);

// A continuous-time recurrent network integrated by forward Euler with a unit
// step:
//
//   y_i <- y_i + (1 / tau_i) * (-y_i + f_i(beta_i + sum_j w_ij y_j))
//
// All non-input neurons are updated synchronously from the pre-step state.
// Input neurons are not integrated; their potentials are overwritten with the
// external inputs at the start of every step.
class Network {
 public:
  Network(std::vector<Neuron> neurons, std::vector<Connection> connections,
          OutputMode mode = OutputMode::kRaw);

  // Clamps inputs and integrates one step. Returns the read-out (softmax if
  // configured), valid until the next call.
  std::span<const double> step(std::span<const double> inputs);

  // Integrates without computing the read-out.
  void advance(std::span<const double> inputs);

  // Read-out of the current output potentials.
  std::span<const double> outputs();

  // One step per entry of `input_sequence`; `window` must equal its length.
  std::vector<std::vector<double>> activate_window(
      std::span<const std::vector<double>> input_sequence, std::size_t window,
      bool reset_first = true);

  void reset();

  std::span<const double> state() const { return state_; }
  std::size_t input_count() const { return input_index_.size(); }
  std::size_t output_count() const { return output_index_.size(); }
  OutputMode output_mode() const { return mode_; }
  const std::vector<Neuron>& neurons() const { return neurons_; }
  const std::vector<Connection>& connections() const { return connections_; }

 private:
  std::vector<Neuron> neurons_;
  std::vector<Connection> connections_;
  OutputMode mode_;

  std::vector<std::size_t> input_index_;   // ordered by neuron id
  std::vector<std::size_t> output_index_;  // ordered by neuron id

  // Every non-input neuron with its incoming edges as a slice of the CSR
  // arrays below.
  struct Unit {
    std::uint32_t index;
    std::uint32_t edge_begin;
    std::uint32_t edge_end;
    bool sigmoid;
    double bias;
    double time_constant;
  };
  std::vector<Unit> units_;
  std::vector<std::uint32_t> incoming_source_;
  std::vector<double> incoming_weight_;

  std::vector<double> state_;
  std::vector<double> next_;
  std::vector<double> readout_;
};

// Builds a network with one neuron per node gene and one connection per
// enabled connection gene. Throws StructuralError on malformed genomes.
Network compile(const Genome& genome, OutputMode mode = OutputMode::kRaw);

}  // namespace sigcomm

#endif  // SIGCOMM_CTRNN_HPP_
