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

// sigcomm: co-evolve sender/receiver CTRNNs and analyze their signals.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sigcomm/error.hpp"
#include "sigcomm/experiment.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  int parallel = 1;
  bool quiet = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "campaign INI file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "base seed, overrides the config");
  cmd->add_option("--runs", f.runs, "runs per experiment, overrides the config")->check(CLI::PositiveNumber);
  cmd->add_option("--parallel", f.parallel, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_flag("--quiet", f.quiet, "only print the final table");
}

sigcomm::CommandOptions to_options(const RunFlags& f) {
  sigcomm::CommandOptions o;
  o.config = f.config;
  o.out = f.out;
  o.seed = f.seed;
  o.runs = f.runs;
  o.parallel = f.parallel;
  o.quiet = f.quiet;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-evolution of sender/receiver CTRNNs and signal analysis"};
  app.require_subcommand(1);

  RunFlags evolve, zero_shot, noise, referential;
  add_run_flags(app.add_subcommand("evolve", "evolve signaling systems"), evolve);
  add_run_flags(app.add_subcommand("zero-shot", "evolve on a concept subset, score the whole vocabulary"),
                zero_shot);
  add_run_flags(app.add_subcommand("noise", "evolve over a noisy channel, then run the 100-episode test"), noise);
  add_run_flags(app.add_subcommand("referential", "referential game over 3-bit objects"), referential);

  auto* analyze = app.add_subcommand("analyze", "constellations and clustering of run archives");
  std::vector<std::string> archives;
  std::string analysis_out = "analysis";
  sigcomm::ClusteringParams clustering;
  analyze->add_option("archives", archives, "run directories or roots to search")->required();
  analyze->add_option("--out", analysis_out, "output directory")->capture_default_str();
  analyze->add_option("--min-samples", clustering.min_samples, "OPTICS min_samples")->capture_default_str();
  analyze->add_option("--xi", clustering.xi, "steepness threshold")->capture_default_str();
  analyze->add_flag("--predecessor-correction", clustering.predecessor_correction,
                    "drop clusters whose predecessor lies outside them");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("evolve")) {
      sigcomm::cmd_evolve(to_options(evolve), std::cout);
    } else if (app.got_subcommand("zero-shot")) {
      sigcomm::cmd_zero_shot(to_options(zero_shot), std::cout);
    } else if (app.got_subcommand("noise")) {
      sigcomm::cmd_noise(to_options(noise), std::cout);
    } else if (app.got_subcommand("referential")) {
      sigcomm::cmd_referential(to_options(referential), std::cout);
    } else {
      sigcomm::AnalysisOptions o;
      for (const auto& a : archives) o.archives.emplace_back(a);
      o.out = analysis_out;
      o.clustering = clustering;
      sigcomm::cmd_analyze(o, std::cout);
    }
  } catch (const sigcomm::Error& e) {
    std::cerr << "sigcomm: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "sigcomm: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
