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

#ifndef SIGCOMM_EXPERIMENT_HPP_
#define SIGCOMM_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sigcomm/analysis.hpp"
#include "sigcomm/coevolution.hpp"
#include "sigcomm/neat.hpp"
#include "sigcomm/task.hpp"

namespace sigcomm {

enum class Protocol : std::uint8_t { kEvolve, kZeroShot, kNoise, kReferential };

const char* to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

// Full parameterization of one experiment (a batch of independent runs).
struct ExperimentConfig {
  std::string name = "experiment";
  Protocol protocol = Protocol::kEvolve;
  Setting setting;
  int vocab_size = 5;
  double noise_sigma = 0.0;
  int trials = 1;
  // Zero-shot: concepts used for fitness. Empty means the whole vocabulary.
  std::vector<int> train_concepts;
  // Referential game.
  int object_count = 3;
  std::uint64_t object_seed = 0;
  int run_count = 20;
  std::uint64_t base_seed = 1;
  int max_generations = 10000;
  int reset_after = 50;
  bool snapshot = false;
  NeatConfig neat;

  // Throws PreconditionError when the fields contradict each other.
  void validate() const;

  ObjectSet objects() const;
  CommunicationTask make_task() const;
  std::uint64_t run_seed(int run_index) const { return base_seed + static_cast<std::uint64_t>(run_index); }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Single-experiment INI record ([experiment] and [neat] sections).
std::string format_experiment_config(const ExperimentConfig& config);
ExperimentConfig parse_experiment_config(std::string_view text);

// Campaign file: a [defaults] section plus one section per experiment. The
// keys setting, vocab_size, sigma, trials, subset_size and object_count accept
// comma-separated lists; a section expands to the Cartesian product. Every
// NeatConfig field can be overridden by name.
std::vector<ExperimentConfig> load_campaign(const std::filesystem::path& path, Protocol protocol);
std::vector<ExperimentConfig> parse_campaign(std::string_view text, Protocol protocol);

struct RunOutcome {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::optional<int> generations_to_converge;
  int generations_run = 0;
  double best_fitness = 0.0;
  int resets = 0;
  std::optional<int> zero_shot_correct;
  std::optional<int> noise_successes;

  bool converged() const { return generations_to_converge.has_value(); }
};

// Runs one seed of an experiment. `threads` only parallelizes pair
// evaluation and does not affect the outcome.
RunOutcome run_single(const ExperimentConfig& config, int run_index, int threads = 1,
                      CoevolutionResult* detail = nullptr);

// Everything a run leaves on disk. Loading never needs the campaign file.
struct RunArchive {
  ExperimentConfig config;
  RunOutcome outcome;
  std::vector<GenerationRecord> history;
  Genome sender;
  Genome receiver;
  SignalingSystem system;
  std::vector<SignalingSystem> snapshots;
};

void write_run_archive(const std::filesystem::path& dir, const RunArchive& archive);
RunArchive read_run_archive(const std::filesystem::path& dir);

struct ExperimentSummary {
  ExperimentConfig config;
  std::vector<RunOutcome> runs;

  int converged_count() const;
  // Median over all runs, a non-converged run counting as infinitely slow.
  double median_generations() const;
  std::optional<double> mean_generations() const;  // converged runs only
  // Mean and population standard deviation over converged runs; empty when
  // no run converged.
  std::optional<std::pair<double, double>> zero_shot_stats() const;
  std::optional<std::pair<double, double>> noise_stats() const;
};

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  int parallel = 1;
  bool quiet = false;
};

// Runs every run of every experiment on `parallel` worker threads, writes one
// archive per run under out/<experiment>/run-NNN and returns the summaries.
std::vector<ExperimentSummary> run_campaign(const std::vector<ExperimentConfig>& experiments,
                                            const std::filesystem::path& out, int parallel,
                                            std::ostream* log = nullptr);

std::vector<ExperimentSummary> cmd_evolve(const CommandOptions& options, std::ostream& log);
std::vector<ExperimentSummary> cmd_zero_shot(const CommandOptions& options, std::ostream& log);
std::vector<ExperimentSummary> cmd_noise(const CommandOptions& options, std::ostream& log);
std::vector<ExperimentSummary> cmd_referential(const CommandOptions& options, std::ostream& log);

struct AnalysisOptions {
  std::vector<std::filesystem::path> archives;  // run directories or roots to search
  std::filesystem::path out = "analysis";
  ClusteringParams clustering;
};

struct AnalysisSummary {
  std::vector<std::string> system_ids;
  std::vector<int> dimensions;
  std::optional<ClusteringReport> clustering;
};

// Directories under each path (or the path itself) holding a run archive,
// in lexicographic order.
std::vector<std::filesystem::path> find_archives(const std::vector<std::filesystem::path>& roots);

AnalysisSummary cmd_analyze(const AnalysisOptions& options, std::ostream& log);

}  // namespace sigcomm

#endif  // SIGCOMM_EXPERIMENT_HPP_
