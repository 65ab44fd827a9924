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

#include "sigcomm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include <boost/algorithm/string/classification.hpp>
#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sigcomm/error.hpp"
#include "sigcomm/rng.hpp"
#include "sigcomm/serialize.hpp"
#include "sigcomm/svg.hpp"

namespace sigcomm {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

constexpr std::uint64_t kObjectTag = 0x4F424A53;  // "OBJS"
constexpr std::uint64_t kNoiseTestTag = 0x4E544553;  // "NTES"

using NeatField = std::variant<int NeatConfig::*, double NeatConfig::*, bool NeatConfig::*>;

const std::vector<std::pair<std::string, NeatField>>& neat_fields() {
  static const std::vector<std::pair<std::string, NeatField>> fields = {
      {"population_size", &NeatConfig::population_size},
      {"conn_add_prob", &NeatConfig::conn_add_prob},
      {"conn_delete_prob", &NeatConfig::conn_delete_prob},
      {"node_add_prob", &NeatConfig::node_add_prob},
      {"node_delete_prob", &NeatConfig::node_delete_prob},
      {"elitism_species", &NeatConfig::elitism_species},
      {"elitism_individual", &NeatConfig::elitism_individual},
      {"stagnation_generations", &NeatConfig::stagnation_generations},
      {"reset_on_extinction", &NeatConfig::reset_on_extinction},
      {"recurrent_allowed", &NeatConfig::recurrent_allowed},
      {"compatibility_threshold", &NeatConfig::compatibility_threshold},
      {"disjoint_coefficient", &NeatConfig::disjoint_coefficient},
      {"weight_coefficient", &NeatConfig::weight_coefficient},
      {"weight_init_mean", &NeatConfig::weight_init_mean},
      {"weight_init_stdev", &NeatConfig::weight_init_stdev},
      {"weight_min", &NeatConfig::weight_min},
      {"weight_max", &NeatConfig::weight_max},
      {"weight_mutate_rate", &NeatConfig::weight_mutate_rate},
      {"weight_mutate_power", &NeatConfig::weight_mutate_power},
      {"weight_replace_rate", &NeatConfig::weight_replace_rate},
      {"bias_init_mean", &NeatConfig::bias_init_mean},
      {"bias_init_stdev", &NeatConfig::bias_init_stdev},
      {"bias_min", &NeatConfig::bias_min},
      {"bias_max", &NeatConfig::bias_max},
      {"bias_mutate_rate", &NeatConfig::bias_mutate_rate},
      {"bias_mutate_power", &NeatConfig::bias_mutate_power},
      {"bias_replace_rate", &NeatConfig::bias_replace_rate},
      {"time_constant_init", &NeatConfig::time_constant_init},
      {"time_constant_mutate_rate", &NeatConfig::time_constant_mutate_rate},
      {"time_constant_mutate_power", &NeatConfig::time_constant_mutate_power},
      {"time_constant_min", &NeatConfig::time_constant_min},
      {"survival_threshold", &NeatConfig::survival_threshold},
      {"crossover_rate", &NeatConfig::crossover_rate},
      {"disabled_inherit_prob", &NeatConfig::disabled_inherit_prob},
  };
  return fields;
}

std::string trimmed(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, value, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || (v < 0 && std::is_unsigned_v<Int>)) throw std::invalid_argument(value);
    return static_cast<Int>(v);
  } catch (const std::logic_error&) {
    throw FormatError("key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const FormatError&) {
    throw FormatError("key '" + key + "': expected a number, got '" + value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw FormatError("key '" + key + "': expected a boolean, got '" + value + "'");
}

bool apply_neat_key(NeatConfig& neat, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : neat_fields()) {
    if (name != key) continue;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(neat.*member)>;
          if constexpr (std::is_same_v<T, int>)
            neat.*member = to_int<int>(key, value);
          else if constexpr (std::is_same_v<T, double>)
            neat.*member = to_double(key, value);
          else
            neat.*member = to_bool(key, value);
        },
        field);
    return true;
  }
  return false;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& p : split_list(value)) out.push_back(to_int<int>(key, p));
  return out;
}

// Scalar keys shared by campaign sections and archived configs.
void apply_key(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "name")
    c.name = value;
  else if (key == "protocol")
    c.protocol = parse_protocol(value);
  else if (key == "setting")
    c.setting = parse_setting(value);
  else if (key == "vocab_size")
    c.vocab_size = to_int<int>(key, value);
  else if (key == "sigma")
    c.noise_sigma = to_double(key, value);
  else if (key == "trials")
    c.trials = to_int<int>(key, value);
  else if (key == "train_concepts")
    c.train_concepts = parse_int_list(key, value);
  else if (key == "object_count")
    c.object_count = to_int<int>(key, value);
  else if (key == "object_seed")
    c.object_seed = to_int<std::uint64_t>(key, value);
  else if (key == "runs")
    c.run_count = to_int<int>(key, value);
  else if (key == "base_seed")
    c.base_seed = to_int<std::uint64_t>(key, value);
  else if (key == "max_generations")
    c.max_generations = to_int<int>(key, value);
  else if (key == "reset_after")
    c.reset_after = to_int<int>(key, value);
  else if (key == "snapshot")
    c.snapshot = to_bool(key, value);
  else if (!apply_neat_key(c.neat, key, value))
    throw FormatError("unknown key '" + key + "'");
}

pt::ptree read_ini_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  return tree;
}

std::string experiment_suffix(const ExperimentConfig& c) {
  std::string s = c.setting.name();
  switch (c.protocol) {
    case Protocol::kReferential:
      return s + "-n" + std::to_string(c.object_count);
    case Protocol::kZeroShot:
      return s + "-v" + std::to_string(c.vocab_size) + "-k" + std::to_string(c.train_concepts.size());
    case Protocol::kNoise:
      return s + "-v" + std::to_string(c.vocab_size) + "-s" + format_double(c.noise_sigma) + "-t" +
             std::to_string(c.trials);
    case Protocol::kEvolve:
      s += "-v" + std::to_string(c.vocab_size);
      if (c.noise_sigma > 0.0) s += "-s" + format_double(c.noise_sigma) + "-t" + std::to_string(c.trials);
      return s;
  }
  return s;
}

double population_std(const std::vector<double>& v, double mean) {
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

std::optional<std::pair<double, double>> converged_stats(const ExperimentSummary& s,
                                                         std::optional<int> RunOutcome::*field) {
  std::vector<double> values;
  for (const auto& r : s.runs)
    if (r.converged() && (r.*field).has_value()) values.push_back(*(r.*field));
  if (values.empty()) return std::nullopt;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  return std::make_pair(mean, population_std(values, mean));
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

std::string stats_cells(const std::optional<std::pair<double, double>>& stats) {
  if (!stats) return "NA,NA";
  return fixed(stats->first) + "," + fixed(stats->second);
}

std::string optional_cell(const std::optional<int>& v) { return v ? std::to_string(*v) : "none"; }

std::string median_cell(double m) { return std::isfinite(m) ? fixed(m, 1) : "NA"; }

std::string safe_id(std::string s) {
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

void write_trend(const fs::path& dir, const std::string& name, const std::vector<std::vector<double>>& runs) {
  std::size_t longest = 0;
  for (const auto& r : runs) longest = std::max(longest, r.size());
  std::ofstream out(dir / "trend.csv");
  out << "generation,mean_best_fitness,min_best_fitness,max_best_fitness\n";
  Series mean_series{"mean", {}, {}};
  for (std::size_t g = 0; g < longest; ++g) {
    double sum = 0.0, lo = kInf, hi = -kInf;
    for (const auto& r : runs) {
      // A finished run keeps its final value.
      const double v = r.empty() ? 0.0 : r[std::min(g, r.size() - 1)];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(runs.size());
    out << g + 1 << ',' << format_double(mean) << ',' << format_double(lo) << ',' << format_double(hi) << '\n';
    mean_series.x.push_back(static_cast<double>(g + 1));
    mean_series.y.push_back(mean);
  }
  write_text_file(dir / "trend.svg",
                  svg_line_plot({mean_series}, {name + ": best fitness", "generation", "best pair fitness"}));
}

std::vector<ExperimentSummary> run_command(const CommandOptions& options, Protocol protocol, std::ostream& log) {
  if (options.config.empty()) throw PreconditionError("--config is required");
  auto experiments = load_campaign(options.config, protocol);
  for (auto& e : experiments) {
    if (options.seed) e.base_seed = *options.seed;
    if (options.runs) e.run_count = *options.runs;
    e.validate();
  }
  fs::create_directories(options.out);
  return run_campaign(experiments, options.out, options.parallel, options.quiet ? nullptr : &log);
}

void print_table(const fs::path& path, const std::string& text, std::ostream& log) {
  write_text_file(path, text);
  log << text;
}

}  // namespace

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::kEvolve: return "evolve";
    case Protocol::kZeroShot: return "zero-shot";
    case Protocol::kNoise: return "noise";
    case Protocol::kReferential: return "referential";
  }
  return "?";
}

Protocol parse_protocol(std::string_view text) {
  for (Protocol p : {Protocol::kEvolve, Protocol::kZeroShot, Protocol::kNoise, Protocol::kReferential})
    if (text == to_string(p)) return p;
  throw FormatError("unknown protocol '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  neat.validate();
  if (vocab_size < 1) throw PreconditionError("vocab_size must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw PreconditionError("sigma must be >= 0");
  if (trials < 1) throw PreconditionError("trials must be >= 1");
  if (run_count < 1) throw PreconditionError("runs must be >= 1");
  if (max_generations < 1) throw PreconditionError("max_generations must be >= 1");
  if (reset_after < 1) throw PreconditionError("reset_after must be >= 1");
  if (protocol == Protocol::kReferential) {
    if (!train_concepts.empty()) throw PreconditionError("referential runs cannot restrict training concepts");
    if (object_count < 1 || object_count > 8) throw PreconditionError("object_count must be in [1, 8]");
  }
  if (protocol == Protocol::kZeroShot && train_concepts.empty())
    throw PreconditionError("zero-shot runs need subset_size or train_concepts");
  for (std::size_t i = 0; i < train_concepts.size(); ++i) {
    if (train_concepts[i] < 1 || train_concepts[i] > vocab_size)
      throw PreconditionError("training concept out of range");
    if (i > 0 && train_concepts[i] <= train_concepts[i - 1])
      throw PreconditionError("training concepts must be strictly increasing");
  }
}

ObjectSet ExperimentConfig::objects() const {
  Rng rng(hash_seed({kObjectTag, object_seed, static_cast<std::uint64_t>(object_count)}));
  return sample_objects(object_count, rng);
}

CommunicationTask ExperimentConfig::make_task() const {
  const Channel channel{noise_sigma, kTimeWindow};
  if (protocol == Protocol::kReferential) return make_referential_task(setting, objects(), channel);
  return make_symbolic_task(setting, Vocabulary{vocab_size}, channel, trials, train_concepts);
}

std::string format_experiment_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "name = " << c.name << '\n';
  out << "protocol = " << to_string(c.protocol) << '\n';
  out << "setting = " << c.setting.name() << '\n';
  out << "vocab_size = " << c.vocab_size << '\n';
  out << "sigma = " << format_double(c.noise_sigma) << '\n';
  out << "trials = " << c.trials << '\n';
  out << "train_concepts = ";
  for (std::size_t i = 0; i < c.train_concepts.size(); ++i) out << (i ? "," : "") << c.train_concepts[i];
  out << '\n';
  out << "object_count = " << c.object_count << '\n';
  out << "object_seed = " << c.object_seed << '\n';
  out << "runs = " << c.run_count << '\n';
  out << "base_seed = " << c.base_seed << '\n';
  out << "max_generations = " << c.max_generations << '\n';
  out << "reset_after = " << c.reset_after << '\n';
  out << "snapshot = " << (c.snapshot ? "true" : "false") << '\n';
  out << "\n[neat]\n";
  for (const auto& [name, field] : neat_fields()) {
    out << name << " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(c.neat.*member)>;
          if constexpr (std::is_same_v<T, double>)
            out << format_double(c.neat.*member);
          else if constexpr (std::is_same_v<T, bool>)
            out << (c.neat.*member ? "true" : "false");
          else
            out << c.neat.*member;
        },
        field);
    out << '\n';
  }
  return out.str();
}

ExperimentConfig parse_experiment_config(std::string_view text) {
  const pt::ptree tree = read_ini_text(text);
  ExperimentConfig c;
  c.train_concepts.clear();
  for (const auto& [section, body] : tree) {
    if (section != "experiment" && section != "neat") throw FormatError("unexpected section [" + section + "]");
    for (const auto& [key, value] : body) {
      const std::string v = trimmed(value.data());
      if (section == "neat") {
        if (!apply_neat_key(c.neat, key, v)) throw FormatError("unknown neat key '" + key + "'");
      } else {
        apply_key(c, key, v);
      }
    }
  }
  return c;
}

std::vector<ExperimentConfig> parse_campaign(std::string_view text, Protocol protocol) {
  const pt::ptree tree = read_ini_text(text);
  std::map<std::string, std::string> defaults;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw FormatError("key '" + section + "' outside of a section");
    std::map<std::string, std::string> keys;
    for (const auto& [key, value] : body) keys[key] = trimmed(value.data());
    if (section == "defaults")
      defaults = std::move(keys);
    else
      sections.emplace_back(section, std::move(keys));
  }
  if (sections.empty()) throw FormatError("config defines no experiment sections");

  static const std::set<std::string> kListKeys = {"setting", "vocab_size", "sigma", "trials", "subset_size",
                                                  "object_count"};
  std::vector<ExperimentConfig> out;
  for (const auto& [section, overrides] : sections) {
    std::map<std::string, std::string> keys = defaults;
    for (const auto& [k, v] : overrides) keys[k] = v;

    ExperimentConfig base;
    base.protocol = protocol;
    for (const auto& [k, v] : keys) {
      if (kListKeys.contains(k) || k == "protocol") continue;
      apply_key(base, k, v);
    }
    if (!keys.contains("object_seed")) base.object_seed = base.base_seed;

    auto values = [&](const std::string& key, const std::string& fallback) {
      auto it = keys.find(key);
      auto list = split_list(it == keys.end() ? fallback : it->second);
      if (list.empty()) throw FormatError("key '" + key + "' is empty");
      return list;
    };
    const auto settings = values("setting", "regression-unlimited");
    const auto vocab_sizes = values("vocab_size", std::to_string(base.vocab_size));
    const auto sigmas = values("sigma", format_double(base.noise_sigma));
    const auto trials = values("trials", std::to_string(base.trials));
    const auto subsets = values("subset_size", "0");
    const auto objects = values("object_count", std::to_string(base.object_count));

    for (const auto& st : settings)
      for (const auto& v : vocab_sizes)
        for (const auto& sg : sigmas)
          for (const auto& t : trials)
            for (const auto& k : subsets)
              for (const auto& n : objects) {
                ExperimentConfig c = base;
                c.setting = parse_setting(st);
                c.vocab_size = to_int<int>("vocab_size", v);
                c.noise_sigma = to_double("sigma", sg);
                c.trials = to_int<int>("trials", t);
                c.object_count = to_int<int>("object_count", n);
                const int subset = to_int<int>("subset_size", k);
                if (subset > 0) {
                  if (subset > c.vocab_size) throw FormatError("subset_size exceeds vocab_size");
                  c.train_concepts = training_subset(c.vocab_size, subset);
                }
                c.name = section + "/" + experiment_suffix(c);
                out.push_back(std::move(c));
              }
  }
  return out;
}

std::vector<ExperimentConfig> load_campaign(const fs::path& path, Protocol protocol) {
  if (!fs::exists(path)) throw PreconditionError("config file '" + path.string() + "' does not exist");
  return parse_campaign(read_text_file(path), protocol);
}

RunOutcome run_single(const ExperimentConfig& config, int run_index, int threads, CoevolutionResult* detail) {
  config.validate();
  const CommunicationTask task = config.make_task();
  const CoevolutionConfig cc{config.neat, config.max_generations, config.reset_after, threads, config.snapshot};
  RunOutcome o;
  o.run_index = run_index;
  o.seed = config.run_seed(run_index);
  CoevolutionResult r = run_coevolution(cc, task, o.seed);
  o.generations_to_converge = r.generations_to_converge;
  o.generations_run = static_cast<int>(r.history.size());
  o.best_fitness = r.best_pair.fitness;
  o.resets = static_cast<int>(r.reset_events.size());

  if (config.protocol == Protocol::kZeroShot || config.protocol == Protocol::kNoise) {
    Network sender = compile(r.best_pair.sender, OutputMode::kRaw);
    Network receiver = compile(r.best_pair.receiver, config.setting.receiver_mode());
    const Vocabulary vocab{config.vocab_size};
    if (config.protocol == Protocol::kZeroShot) {
      o.zero_shot_correct = zero_shot_score(sender, receiver, vocab, config.setting);
    } else {
      Rng rng(hash_seed({kNoiseTestTag, o.seed}));
      o.noise_successes = noise_test(sender, receiver, vocab, config.setting, config.noise_sigma, rng);
    }
  }
  if (detail) *detail = std::move(r);
  return o;
}

void write_run_archive(const fs::path& dir, const RunArchive& a) {
  fs::create_directories(dir);
  write_text_file(dir / "config.ini", format_experiment_config(a.config));

  std::ostringstream result;
  result << "[result]\n";
  result << "run_index = " << a.outcome.run_index << '\n';
  result << "seed = " << a.outcome.seed << '\n';
  result << "converged = " << (a.outcome.converged() ? "true" : "false") << '\n';
  result << "generations_to_converge = " << optional_cell(a.outcome.generations_to_converge) << '\n';
  result << "generations_run = " << a.outcome.generations_run << '\n';
  result << "best_fitness = " << format_double(a.outcome.best_fitness) << '\n';
  result << "resets = " << a.outcome.resets << '\n';
  result << "zero_shot_correct = " << optional_cell(a.outcome.zero_shot_correct) << '\n';
  result << "noise_successes = " << optional_cell(a.outcome.noise_successes) << '\n';
  write_text_file(dir / "result.ini", result.str());

  {
    std::ofstream out(dir / "fitness.csv", std::ios::binary);
    write_fitness_csv(out, a.history);
  }
  write_genome_file(dir / "sender.genome", a.sender);
  write_genome_file(dir / "receiver.genome", a.receiver);
  {
    std::ofstream out(dir / "signals.csv", std::ios::binary);
    write_signals_csv(out, a.system);
  }
  if (!a.snapshots.empty()) {
    std::ofstream out(dir / "snapshots.csv", std::ios::binary);
    write_snapshots_csv(out, a.snapshots);
  }
  if (a.config.protocol == Protocol::kReferential) {
    std::ofstream out(dir / "objects.csv", std::ios::binary);
    out << "position,f1,f2,f3\n";
    const ObjectSet objects = a.config.objects();
    for (std::size_t i = 0; i < objects.size(); ++i)
      out << i + 1 << ',' << objects.objects[i][0] << ',' << objects.objects[i][1] << ',' << objects.objects[i][2]
          << '\n';
  }
}

RunArchive read_run_archive(const fs::path& dir) {
  RunArchive a;
  a.config = parse_experiment_config(read_text_file(dir / "config.ini"));

  const pt::ptree result = read_ini_text(read_text_file(dir / "result.ini"));
  auto get = [&](const std::string& key) {
    auto v = result.get_optional<std::string>("result." + key);
    if (!v) throw FormatError("result.ini lacks '" + key + "'");
    return trimmed(*v);
  };
  auto get_optional_int = [&](const std::string& key) -> std::optional<int> {
    const std::string v = get(key);
    if (v == "none") return std::nullopt;
    return to_int<int>(key, v);
  };
  a.outcome.run_index = to_int<int>("run_index", get("run_index"));
  a.outcome.seed = to_int<std::uint64_t>("seed", get("seed"));
  a.outcome.generations_to_converge = get_optional_int("generations_to_converge");
  a.outcome.generations_run = to_int<int>("generations_run", get("generations_run"));
  a.outcome.best_fitness = to_double("best_fitness", get("best_fitness"));
  a.outcome.resets = to_int<int>("resets", get("resets"));
  a.outcome.zero_shot_correct = get_optional_int("zero_shot_correct");
  a.outcome.noise_successes = get_optional_int("noise_successes");
  if (to_bool("converged", get("converged")) != a.outcome.converged())
    throw FormatError("result.ini is inconsistent");

  {
    std::ifstream in(dir / "fitness.csv", std::ios::binary);
    if (!in) throw FormatError("archive lacks fitness.csv");
    a.history = read_fitness_csv(in);
  }
  a.sender = read_genome_file(dir / "sender.genome");
  a.receiver = read_genome_file(dir / "receiver.genome");
  {
    std::ifstream in(dir / "signals.csv", std::ios::binary);
    if (!in) throw FormatError("archive lacks signals.csv");
    a.system = read_signals_csv(in);
  }
  a.system.provenance = a.config.name + "/run-" + std::to_string(a.outcome.run_index);
  if (fs::exists(dir / "snapshots.csv")) {
    std::ifstream in(dir / "snapshots.csv", std::ios::binary);
    a.snapshots = read_snapshots_csv(in);
    for (auto& s : a.snapshots) s.provenance = a.system.provenance;
  }
  return a;
}

int ExperimentSummary::converged_count() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const RunOutcome& r) { return r.converged(); }));
}

double ExperimentSummary::median_generations() const {
  std::vector<double> g;
  for (const auto& r : runs) g.push_back(r.converged() ? *r.generations_to_converge : kInf);
  if (g.empty()) return kInf;
  std::sort(g.begin(), g.end());
  const std::size_t n = g.size();
  return n % 2 ? g[n / 2] : 0.5 * (g[n / 2 - 1] + g[n / 2]);
}

std::optional<double> ExperimentSummary::mean_generations() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : runs) {
    if (!r.converged()) continue;
    sum += *r.generations_to_converge;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<std::pair<double, double>> ExperimentSummary::zero_shot_stats() const {
  return converged_stats(*this, &RunOutcome::zero_shot_correct);
}

std::optional<std::pair<double, double>> ExperimentSummary::noise_stats() const {
  return converged_stats(*this, &RunOutcome::noise_successes);
}

std::vector<ExperimentSummary> run_campaign(const std::vector<ExperimentConfig>& experiments, const fs::path& out,
                                            int parallel, std::ostream* log) {
  struct Job {
    std::size_t experiment;
    int run;
  };
  std::vector<Job> jobs;
  std::vector<ExperimentSummary> summaries(experiments.size());
  std::vector<std::vector<std::vector<double>>> curves(experiments.size());
  for (std::size_t e = 0; e < experiments.size(); ++e) {
    experiments[e].validate();
    summaries[e].config = experiments[e];
    summaries[e].runs.resize(static_cast<std::size_t>(experiments[e].run_count));
    curves[e].resize(static_cast<std::size_t>(experiments[e].run_count));
    for (int k = 0; k < experiments[e].run_count; ++k) jobs.push_back({e, k});
  }

  const int workers = std::clamp(parallel, 1, std::max<int>(1, static_cast<int>(jobs.size())));
  const int inner_threads = std::max(1, parallel / std::max<int>(1, static_cast<int>(jobs.size())));
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

  auto worker = [&](std::size_t w) {
    try {
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        const Job job = jobs[j];
        const ExperimentConfig& config = experiments[job.experiment];
        CoevolutionResult detail;
        RunOutcome outcome = run_single(config, job.run, inner_threads, &detail);

        RunArchive archive{config, outcome, detail.history, detail.best_pair.sender, detail.best_pair.receiver,
                           detail.final_signaling_system, detail.snapshots};
        char run_dir[32];
        std::snprintf(run_dir, sizeof run_dir, "run-%03d", job.run);
        write_run_archive(out / config.name / run_dir, archive);

        curves[job.experiment][static_cast<std::size_t>(job.run)] = detail.fitness_history();
        summaries[job.experiment].runs[static_cast<std::size_t>(job.run)] = outcome;
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << config.name << " run " << job.run << " seed " << outcome.seed << ": ";
          if (outcome.converged())
            *log << "converged at generation " << *outcome.generations_to_converge;
          else
            *log << "no convergence, best fitness " << outcome.best_fitness;
          *log << '\n' << std::flush;
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = jobs.size();
    }
  };

  if (workers == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker, static_cast<std::size_t>(w));
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t e = 0; e < experiments.size(); ++e) write_trend(out / experiments[e].name, experiments[e].name, curves[e]);
  return summaries;
}

std::vector<ExperimentSummary> cmd_evolve(const CommandOptions& options, std::ostream& log) {
  auto summaries = run_command(options, Protocol::kEvolve, log);
  std::ostringstream t;
  t << "experiment,setting,vocab_size,sigma,trials,runs,converged,convergence_rate,median_generations,"
       "mean_generations\n";
  for (const auto& s : summaries) {
    const auto& c = s.config;
    const auto mean = s.mean_generations();
    t << c.name << ',' << c.setting.name() << ',' << c.vocab_size << ',' << format_double(c.noise_sigma) << ','
      << c.trials << ',' << s.runs.size() << ',' << s.converged_count() << ','
      << fixed(static_cast<double>(s.converged_count()) / static_cast<double>(s.runs.size())) << ','
      << median_cell(s.median_generations()) << ',' << (mean ? fixed(*mean, 1) : "NA") << '\n';
  }
  print_table(options.out / "summary.csv", t.str(), log);
  return summaries;
}

std::vector<ExperimentSummary> cmd_zero_shot(const CommandOptions& options, std::ostream& log) {
  auto summaries = run_command(options, Protocol::kZeroShot, log);
  std::ostringstream t;
  t << "experiment,setting,vocab_size,subset_size,runs,converged,mean_correct,std_correct\n";
  for (const auto& s : summaries) {
    const auto& c = s.config;
    t << c.name << ',' << c.setting.name() << ',' << c.vocab_size << ',' << c.train_concepts.size() << ','
      << s.runs.size() << ',' << s.converged_count() << ',' << stats_cells(s.zero_shot_stats()) << '\n';
  }
  print_table(options.out / "zero_shot.csv", t.str(), log);
  return summaries;
}

std::vector<ExperimentSummary> cmd_noise(const CommandOptions& options, std::ostream& log) {
  auto summaries = run_command(options, Protocol::kNoise, log);
  std::ostringstream t;
  t << "experiment,setting,vocab_size,sigma,trials,runs,converged,mean_success,std_success\n";
  for (const auto& s : summaries) {
    const auto& c = s.config;
    t << c.name << ',' << c.setting.name() << ',' << c.vocab_size << ',' << format_double(c.noise_sigma) << ','
      << c.trials << ',' << s.runs.size() << ',' << s.converged_count() << ',' << stats_cells(s.noise_stats())
      << '\n';
  }
  print_table(options.out / "noise.csv", t.str(), log);
  return summaries;
}

std::vector<ExperimentSummary> cmd_referential(const CommandOptions& options, std::ostream& log) {
  auto summaries = run_command(options, Protocol::kReferential, log);
  std::ostringstream t;
  t << "experiment,setting,object_count,runs,converged,convergence_rate,median_generations\n";
  for (const auto& s : summaries) {
    const auto& c = s.config;
    t << c.name << ',' << c.setting.name() << ',' << c.object_count << ',' << s.runs.size() << ','
      << s.converged_count() << ','
      << fixed(static_cast<double>(s.converged_count()) / static_cast<double>(s.runs.size())) << ','
      << median_cell(s.median_generations()) << '\n';
  }
  print_table(options.out / "referential.csv", t.str(), log);
  return summaries;
}

std::vector<fs::path> find_archives(const std::vector<fs::path>& roots) {
  auto is_archive = [](const fs::path& p) {
    return fs::is_directory(p) && fs::exists(p / "config.ini") && fs::exists(p / "result.ini");
  };
  std::set<fs::path> found;
  for (const auto& root : roots) {
    if (!fs::exists(root)) throw PreconditionError("'" + root.string() + "' does not exist");
    if (is_archive(root)) {
      found.insert(root);
      continue;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root))
      if (is_archive(entry.path())) found.insert(entry.path());
  }
  return {found.begin(), found.end()};
}

AnalysisSummary cmd_analyze(const AnalysisOptions& options, std::ostream& log) {
  const auto dirs = find_archives(options.archives);
  if (dirs.empty()) throw PreconditionError("no run archives found");
  fs::create_directories(options.out / "constellations");
  fs::create_directories(options.out / "signals");

  AnalysisSummary summary;
  std::vector<SignalingSystem> systems;
  std::ostringstream dims;
  dims << "system_id,vocab_size,dimension,truncated\n";
  for (const auto& dir : dirs) {
    const RunArchive a = read_run_archive(dir);
    const std::string id = a.system.provenance;
    const std::string file = safe_id(id);
    summary.system_ids.push_back(id);
    systems.push_back(a.system);

    std::vector<Series> waves;
    for (std::size_t i = 0; i < a.system.signals.size(); ++i) {
      Series s{"concept " + std::to_string(i + 1), {}, a.system.signals[i]};
      for (std::size_t t = 0; t < s.y.size(); ++t) s.x.push_back(static_cast<double>(t));
      waves.push_back(std::move(s));
    }
    write_text_file(options.out / "signals" / (file + ".svg"), svg_line_plot(waves, {id, "sample", "amplitude"}));

    try {
      const Constellation2d c = constellation_2d(a.system, false);
      summary.dimensions.push_back(c.dimension);
      dims << id << ',' << a.system.vocab_size << ',' << c.dimension << ',' << (c.truncated ? 1 : 0) << '\n';
      if (c.truncated) log << "warning: " << id << " has dimension " << c.dimension << "; kept phi_1, phi_2\n";
      std::ofstream out(options.out / "constellations" / (file + ".csv"));
      write_constellation_csv(out, c);
      std::vector<Series> pts;
      for (std::size_t i = 0; i < c.points.size(); ++i)
        pts.push_back({"concept " + std::to_string(i + 1), {c.points[i].first}, {c.points[i].second}});
      write_text_file(options.out / "constellations" / (file + ".svg"),
                      svg_scatter_plot(pts, {id, "phi_1", "phi_2"}));
    } catch (const DegenerateInputError& e) {
      summary.dimensions.push_back(-1);
      dims << id << ',' << a.system.vocab_size << ",NA,0\n";
      log << "warning: " << id << ": " << e.what() << '\n';
    }

    if (!a.snapshots.empty()) {
      std::ofstream out(options.out / "constellations" / (file + "-generations.csv"));
      out << "generation,concept,x,y,dimension\n";
      for (std::size_t g = 0; g < a.snapshots.size(); ++g) {
        try {
          const Constellation2d c = constellation_2d(a.snapshots[g], false);
          for (std::size_t i = 0; i < c.points.size(); ++i)
            out << g + 1 << ',' << i + 1 << ',' << format_double(c.points[i].first) << ','
                << format_double(c.points[i].second) << ',' << c.dimension << '\n';
        } catch (const DegenerateInputError&) {
          // A silent first concept has no constellation.
        }
      }
    }
  }
  write_text_file(options.out / "dimensions.csv", dims.str());

  bool same_vocab = true;
  for (const auto& s : systems) same_vocab = same_vocab && s.vocab_size == systems.front().vocab_size;
  if (systems.size() < 2) {
    log << "clustering skipped: a single archive\n";
    return summary;
  }
  if (!same_vocab) {
    log << "warning: clustering skipped: archives mix vocabulary sizes\n";
    return summary;
  }

  ClusteringReport report = cluster_systems(systems, options.clustering);
  const auto& ids = summary.system_ids;
  std::set<std::size_t> medoid_set(report.medoids.begin(), report.medoids.end());
  {
    std::ostringstream out;
    out << "system_id,label,is_medoid,nn_label\n";
    for (std::size_t i = 0; i < systems.size(); ++i)
      out << ids[i] << ',' << report.labels[i] << ',' << (medoid_set.contains(i) ? 1 : 0) << ','
          << report.nn_labels[i] << '\n';
    write_text_file(options.out / "clusters.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "position,system_id,reachability,core_distance\n";
    Series plot{"reachability", {}, {}};
    for (std::size_t p = 0; p < report.optics.ordering.size(); ++p) {
      const std::size_t i = report.optics.ordering[p];
      out << p << ',' << ids[i] << ',' << format_double(report.optics.reachability[i]) << ','
          << format_double(report.optics.core_distances[i]) << '\n';
      plot.x.push_back(static_cast<double>(p));
      plot.y.push_back(report.optics.reachability[i]);
    }
    write_text_file(options.out / "reachability.csv", out.str());
    write_text_file(options.out / "reachability.svg",
                    svg_line_plot({plot}, {"reachability plot", "ordering position", "reachability"}));
  }
  {
    std::ostringstream out;
    out << "cluster,medoid_system_id,systems,share\n";
    for (std::size_t c = 0; c < report.medoids.size(); ++c) {
      const auto n = std::count(report.nn_labels.begin(), report.nn_labels.end(), static_cast<int>(c));
      out << c << ',' << ids[report.medoids[c]] << ',' << n << ',' << fixed(report.shares[c], 4) << '\n';
    }
    write_text_file(options.out / "shares.csv", out.str());
    log << out.str();
  }
  {
    std::ostringstream central, mean;
    const std::size_t samples = systems.front().signals.empty() ? kTimeWindow : systems.front().signals[0].size();
    std::string header = "cluster,concept";
    for (std::size_t t = 0; t < samples; ++t) header += ",t" + std::to_string(t);
    central << header << '\n';
    mean << header << '\n';
    for (std::size_t c = 0; c < report.medoids.size(); ++c) {
      const auto& m = systems[report.medoids[c]];
      std::vector<Series> waves;
      for (std::size_t i = 0; i < m.signals.size(); ++i) {
        central << c << ',' << i + 1;
        for (double v : m.signals[i]) central << ',' << format_double(v);
        central << '\n';
        mean << c << ',' << i + 1;
        for (double v : report.mean_systems[c].signals[i]) mean << ',' << format_double(v);
        mean << '\n';
        Series s{"concept " + std::to_string(i + 1), {}, m.signals[i]};
        for (std::size_t t = 0; t < s.y.size(); ++t) s.x.push_back(static_cast<double>(t));
        waves.push_back(std::move(s));
      }
      write_text_file(options.out / ("central_signals_" + std::to_string(c) + ".svg"),
                      svg_line_plot(waves, {"cluster " + std::to_string(c) + " central signals", "sample",
                                            "amplitude"}));
    }
    write_text_file(options.out / "central_signals.csv", central.str());
    write_text_file(options.out / "mean_signals.csv", mean.str());
  }
  {
    std::ostringstream out;
    out << "system_id";
    for (const auto& id : ids) out << ',' << id;
    out << '\n';
    std::vector<std::vector<double>> vectors;
    for (const auto& s : systems) vectors.push_back(system_vector(s));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      out << ids[i];
      for (std::size_t j = 0; j < vectors.size(); ++j) out << ',' << format_double(chebyshev(vectors[i], vectors[j]));
      out << '\n';
    }
    write_text_file(options.out / "distances.csv", out.str());
  }
  summary.clustering = std::move(report);
  return summary;
}

}  // namespace sigcomm
