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

#ifndef SIGCOMM_TASK_HPP_
#define SIGCOMM_TASK_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sigcomm/ctrnn.hpp"
#include "sigcomm/neat.hpp"
#include "sigcomm/rng.hpp"

namespace sigcomm {

// Number of samples in every transmitted signal.
inline constexpr std::size_t kTimeWindow = 10;

using Signal = std::vector<double>;

enum class Decoding : std::uint8_t { kRegression, kClassification };
enum class Amplitude : std::uint8_t { kUnlimited, kLimited };

// One of the four decoding/amplitude combinations. Fixes the sender's
// activation (identity when unlimited, sigmoid when limited) and the
// receiver's read-out (one identity output for regression, one sigmoid output
// per class with a softmax read-out for classification).
struct Setting {
  Decoding decoding = Decoding::kRegression;
  Amplitude amplitude = Amplitude::kUnlimited;

  Activation sender_activation() const;
  Activation receiver_activation() const;
  OutputMode receiver_mode() const;
  int receiver_outputs(int classes) const;

  GenomeLayout sender_layout(int inputs) const;
  GenomeLayout receiver_layout(int classes) const;

  std::string name() const;  // e.g. "regression-unlimited"

  friend bool operator==(const Setting&, const Setting&) = default;
};

Setting parse_setting(std::string_view name);
std::vector<Setting> all_settings();

// Concepts 1..size, concept i described by the single feature i / size.
struct Vocabulary {
  int size = 1;

  std::vector<double> features() const;
};

double encode_concept(int concept_index, const Vocabulary& vocab);

// Evenly spaced training concepts, e.g. 5 of 10 -> {1, 3, 5, 7, 9}.
std::vector<int> training_subset(int vocab_size, int subset_size);

struct Channel {
  double sigma = 0.0;
  std::size_t window = kTimeWindow;
};

// Ordered collection of distinct 3-bit objects; position i (1-based) is the
// object's identity for both agents.
struct ObjectSet {
  std::vector<std::array<int, 3>> objects;

  std::size_t size() const { return objects.size(); }
};

// `count` distinct triples drawn at random (a random ordering of all eight
// when count == 8). Throws PreconditionError for count outside [1, 8].
ObjectSet sample_objects(int count, Rng& rng);

// Holds the input constant for the whole window and records the sender output
// after every step. The sender is reset first.
Signal clean_signal(Network& sender, std::span<const double> input, std::size_t window = kTimeWindow);

// Adds independent N(0, sigma^2) noise to every sample; sigma == 0 is an exact
// pass-through and consumes no randomness.
void add_noise(Signal& signal, double sigma, Rng& rng);

Signal transmit(Network& sender, std::span<const double> input, const Channel& channel, Rng& rng);

// Resets the receiver, feeds one sample per step and reads the decision after
// the final step. Returns a 1-based class index: the nearest of i / classes
// for regression, the argmax of the softmax outputs for classification. Ties
// go to the lower index.
int decode(Network& receiver, std::span<const double> signal, const Setting& setting, int classes);

// Mapping used by decode() once the final output is known.
int decode_regression_output(double output, int classes);
int decode_classification_output(std::span<const double> outputs);

// One communication attempt: the sender sees `input`, the receiver must
// answer `target` (1-based).
struct Episode {
  std::vector<double> input;
  int target = 1;
};

// Everything the co-evolution harness needs to score a sender/receiver pair.
// `episodes` are the ones used for fitness; `all_episodes` covers the whole
// vocabulary (or object set) and defines the signaling system.
class CommunicationTask {
 public:
  CommunicationTask(Setting setting, int classes, int sender_inputs, std::vector<Episode> episodes,
                    std::vector<Episode> all_episodes, Channel channel, int trials);

  const Setting& setting() const { return setting_; }
  int classes() const { return classes_; }
  int sender_inputs() const { return sender_inputs_; }
  const std::vector<Episode>& episodes() const { return episodes_; }
  const std::vector<Episode>& all_episodes() const { return all_episodes_; }
  const Channel& channel() const { return channel_; }
  int trials() const { return trials_; }

  GenomeLayout sender_layout() const { return setting_.sender_layout(sender_inputs_); }
  GenomeLayout receiver_layout() const { return setting_.receiver_layout(classes_); }
  OutputMode receiver_mode() const { return setting_.receiver_mode(); }

  // Noise-free sender signal for each fitness episode.
  std::vector<Signal> sender_signals(Network& sender) const;

  // Eq.-style fitness: minus the number of failed episodes over all trials.
  // `clean` must come from sender_signals(). Noise is drawn from `rng` in
  // trial-major, episode-minor order.
  double pair_fitness(std::span<const Signal> clean, Network& receiver, Rng& rng) const;

  double pair_fitness(Network& sender, Network& receiver, Rng& rng) const;

  // Lowest possible fitness.
  double worst_fitness() const { return -static_cast<double>(trials_) * static_cast<double>(episodes_.size()); }

 private:
  Setting setting_;
  int classes_;
  int sender_inputs_;
  std::vector<Episode> episodes_;
  std::vector<Episode> all_episodes_;
  Channel channel_;
  int trials_;
};

// Symbolic task over `vocab`; fitness uses `train_concepts` (all concepts when
// empty).
CommunicationTask make_symbolic_task(const Setting& setting, const Vocabulary& vocab, const Channel& channel,
                                     int trials, std::vector<int> train_concepts = {});

CommunicationTask make_referential_task(const Setting& setting, const ObjectSet& objects,
                                        const Channel& channel);

double pair_fitness_symbolic(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting,
                             const Channel& channel, int trials, Rng& rng);

double pair_fitness_referential(Network& sender, Network& receiver, const ObjectSet& objects,
                                const Setting& setting, const Channel& channel, Rng& rng);

// Number of concepts of the whole vocabulary communicated correctly over a
// noise-free channel.
int zero_shot_score(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting);

// 100 transmit/decode episodes with fresh noise, cycling through the
// concepts (20 per concept for |V| = 5, 25 for |V| = 4). Returns successes.
int noise_test(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting, double sigma,
               Rng& rng, int episodes = 100);

}  // namespace sigcomm

#endif  // SIGCOMM_TASK_HPP_
