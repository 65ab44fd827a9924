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

#include "sigcomm/task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sigcomm/error.hpp"

namespace sigcomm {

Activation Setting::sender_activation() const {
  return amplitude == Amplitude::kLimited ? Activation::kSigmoid : Activation::kIdentity;
}

Activation Setting::receiver_activation() const {
  return decoding == Decoding::kClassification ? Activation::kSigmoid : Activation::kIdentity;
}

OutputMode Setting::receiver_mode() const {
  return decoding == Decoding::kClassification ? OutputMode::kSoftmax : OutputMode::kRaw;
}

int Setting::receiver_outputs(int classes) const {
  return decoding == Decoding::kClassification ? classes : 1;
}

GenomeLayout Setting::sender_layout(int inputs) const {
  return {inputs, 1, sender_activation(), sender_activation()};
}

GenomeLayout Setting::receiver_layout(int classes) const {
  return {1, receiver_outputs(classes), receiver_activation(), receiver_activation()};
}

std::string Setting::name() const {
  std::string out = decoding == Decoding::kRegression ? "regression" : "classification";
  out += amplitude == Amplitude::kUnlimited ? "-unlimited" : "-limited";
  return out;
}

Setting parse_setting(std::string_view name) {
  for (const Setting& s : all_settings())
    if (s.name() == name) return s;
  throw FormatError("unknown setting '" + std::string(name) + "'");
}

std::vector<Setting> all_settings() {
  return {{Decoding::kRegression, Amplitude::kUnlimited},
          {Decoding::kRegression, Amplitude::kLimited},
          {Decoding::kClassification, Amplitude::kUnlimited},
          {Decoding::kClassification, Amplitude::kLimited}};
}

std::vector<double> Vocabulary::features() const {
  std::vector<double> out;
  out.reserve(size);
  for (int i = 1; i <= size; ++i) out.push_back(encode_concept(i, *this));
  return out;
}

double encode_concept(int concept_index, const Vocabulary& vocab) {
  if (vocab.size < 1) throw PreconditionError("vocabulary size must be at least 1");
  if (concept_index < 1 || concept_index > vocab.size)
    throw PreconditionError("concept index " + std::to_string(concept_index) + " outside 1.." +
                            std::to_string(vocab.size));
  return static_cast<double>(concept_index) / static_cast<double>(vocab.size);
}

std::vector<int> training_subset(int vocab_size, int subset_size) {
  if (subset_size < 1 || subset_size > vocab_size)
    throw PreconditionError("training subset size must lie in 1..|V|");
  std::vector<int> out;
  for (int k = 0; k < subset_size; ++k) out.push_back(1 + (k * vocab_size) / subset_size);
  return out;
}

ObjectSet sample_objects(int count, Rng& rng) {
  if (count < 1 || count > 8) throw PreconditionError("object count must lie in 1..8");
  std::vector<std::array<int, 3>> all;
  for (int b = 0; b < 8; ++b) all.push_back({(b >> 2) & 1, (b >> 1) & 1, b & 1});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(count));
  return {std::move(all)};
}

Signal clean_signal(Network& sender, std::span<const double> input, std::size_t window) {
  sender.reset();
  Signal out;
  out.reserve(window);
  for (std::size_t t = 0; t < window; ++t) out.push_back(sender.step(input)[0]);
  return out;
}

void add_noise(Signal& signal, double sigma, Rng& rng) {
  if (sigma < 0.0) throw PreconditionError("noise sigma must be non-negative");
  if (sigma == 0.0) return;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& s : signal) s += noise(rng);
}

Signal transmit(Network& sender, std::span<const double> input, const Channel& channel, Rng& rng) {
  if (input.size() != sender.input_count())
    throw PreconditionError("sender expects " + std::to_string(sender.input_count()) + " inputs");
  Signal s = clean_signal(sender, input, channel.window);
  add_noise(s, channel.sigma, rng);
  return s;
}

int decode_regression_output(double output, int classes) {
  // argmin_i |output - i/classes|, compared as |output*classes - i| so that
  // exact ties resolve to the lower index.
  const double scaled = output * static_cast<double>(classes);
  int best = 1;
  double best_gap = std::abs(scaled - 1.0);
  for (int i = 2; i <= classes; ++i) {
    const double gap = std::abs(scaled - static_cast<double>(i));
    if (gap < best_gap) {
      best = i;
      best_gap = gap;
    }
  }
  return best;
}

int decode_classification_output(std::span<const double> outputs) {
  if (outputs.empty()) throw PreconditionError("classification read-out is empty");
  std::size_t best = 0;
  for (std::size_t k = 1; k < outputs.size(); ++k)
    if (outputs[k] > outputs[best]) best = k;
  return static_cast<int>(best) + 1;
}

int decode(Network& receiver, std::span<const double> signal, const Setting& setting, int classes) {
  if (receiver.input_count() != 1) throw PreconditionError("receiver must have exactly one input");
  if (static_cast<int>(receiver.output_count()) != setting.receiver_outputs(classes))
    throw PreconditionError("receiver output count does not match the setting");
  receiver.reset();
  for (double sample : signal) receiver.advance(std::span<const double>(&sample, 1));
  auto out = receiver.outputs();
  if (setting.decoding == Decoding::kRegression) return decode_regression_output(out[0], classes);
  return decode_classification_output(out);
}

CommunicationTask::CommunicationTask(Setting setting, int classes, int sender_inputs, std::vector<Episode> episodes,
                                     std::vector<Episode> all_episodes, Channel channel, int trials)
    : setting_(setting),
      classes_(classes),
      sender_inputs_(sender_inputs),
      episodes_(std::move(episodes)),
      all_episodes_(std::move(all_episodes)),
      channel_(channel),
      trials_(trials) {
  if (classes_ < 1) throw PreconditionError("a task needs at least one class");
  if (trials_ < 1) throw PreconditionError("trials must be at least 1");
  if (channel_.sigma < 0.0) throw PreconditionError("noise sigma must be non-negative");
  if (episodes_.empty()) throw PreconditionError("a task needs at least one fitness episode");
  for (const auto* list : {&episodes_, &all_episodes_}) {
    for (const Episode& e : *list) {
      if (static_cast<int>(e.input.size()) != sender_inputs_)
        throw PreconditionError("episode input does not match the sender input count");
      if (e.target < 1 || e.target > classes_) throw PreconditionError("episode target out of range");
    }
  }
}

std::vector<Signal> CommunicationTask::sender_signals(Network& sender) const {
  std::vector<Signal> out;
  out.reserve(episodes_.size());
  for (const Episode& e : episodes_) out.push_back(clean_signal(sender, e.input, channel_.window));
  return out;
}

double CommunicationTask::pair_fitness(std::span<const Signal> clean, Network& receiver, Rng& rng) const {
  if (clean.size() != episodes_.size()) throw PreconditionError("one clean signal per episode is required");
  int failures = 0;
  Signal noisy;
  for (int t = 0; t < trials_; ++t) {
    for (std::size_t e = 0; e < episodes_.size(); ++e) {
      int decoded;
      if (channel_.sigma == 0.0) {
        decoded = decode(receiver, clean[e], setting_, classes_);
      } else {
        noisy.assign(clean[e].begin(), clean[e].end());
        add_noise(noisy, channel_.sigma, rng);
        decoded = decode(receiver, noisy, setting_, classes_);
      }
      if (decoded != episodes_[e].target) ++failures;
    }
  }
  return -static_cast<double>(failures);
}

double CommunicationTask::pair_fitness(Network& sender, Network& receiver, Rng& rng) const {
  const std::vector<Signal> clean = sender_signals(sender);
  return pair_fitness(clean, receiver, rng);
}

CommunicationTask make_symbolic_task(const Setting& setting, const Vocabulary& vocab, const Channel& channel,
                                     int trials, std::vector<int> train_concepts) {
  if (train_concepts.empty()) {
    train_concepts.resize(static_cast<std::size_t>(vocab.size));
    std::iota(train_concepts.begin(), train_concepts.end(), 1);
  }
  std::vector<Episode> all;
  for (int i = 1; i <= vocab.size; ++i) all.push_back({{encode_concept(i, vocab)}, i});
  std::vector<Episode> train;
  for (int i : train_concepts) train.push_back({{encode_concept(i, vocab)}, i});
  return CommunicationTask(setting, vocab.size, 1, std::move(train), std::move(all), channel, trials);
}

CommunicationTask make_referential_task(const Setting& setting, const ObjectSet& objects, const Channel& channel) {
  std::vector<Episode> episodes;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& bits = objects.objects[i];
    episodes.push_back({{static_cast<double>(bits[0]), static_cast<double>(bits[1]), static_cast<double>(bits[2])},
                        static_cast<int>(i) + 1});
  }
  const int n = static_cast<int>(objects.size());
  return CommunicationTask(setting, n, 3, episodes, episodes, channel, 1);
}

double pair_fitness_symbolic(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting,
                             const Channel& channel, int trials, Rng& rng) {
  return make_symbolic_task(setting, vocab, channel, trials).pair_fitness(sender, receiver, rng);
}

double pair_fitness_referential(Network& sender, Network& receiver, const ObjectSet& objects,
                                const Setting& setting, const Channel& channel, Rng& rng) {
  if (sender.input_count() != 3) throw PreconditionError("referential senders need three inputs");
  return make_referential_task(setting, objects, channel).pair_fitness(sender, receiver, rng);
}

int zero_shot_score(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting) {
  int correct = 0;
  for (int i = 1; i <= vocab.size; ++i) {
    const double feature = encode_concept(i, vocab);
    const Signal s = clean_signal(sender, std::span<const double>(&feature, 1));
    if (decode(receiver, s, setting, vocab.size) == i) ++correct;
  }
  return correct;
}

int noise_test(Network& sender, Network& receiver, const Vocabulary& vocab, const Setting& setting, double sigma,
               Rng& rng, int episodes) {
  std::vector<Signal> clean;
  for (int i = 1; i <= vocab.size; ++i) {
    const double feature = encode_concept(i, vocab);
    clean.push_back(clean_signal(sender, std::span<const double>(&feature, 1)));
  }
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    const int concept_index = 1 + e % vocab.size;
    Signal s = clean[static_cast<std::size_t>(concept_index - 1)];
    add_noise(s, sigma, rng);
    if (decode(receiver, s, setting, vocab.size) == concept_index) ++successes;
  }
  return successes;
}

}  // namespace sigcomm
