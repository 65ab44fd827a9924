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

#include "sigcomm/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include "sigcomm/error.hpp"

namespace sigcomm {

namespace {

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> fields;
  boost::algorithm::split(fields, line, [sep](char c) { return c == sep; });
  for (auto& f : fields) boost::algorithm::trim(f);
  return fields;
}

template <typename Int>
Int parse_int(std::string_view text) {
  Int value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw FormatError("bad integer '" + std::string(text) + "'");
  return value;
}

std::string header_with_samples(std::string_view prefix, std::size_t samples) {
  std::string header(prefix);
  for (std::size_t t = 0; t < samples; ++t) header += ",t" + std::to_string(t);
  return header;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw FormatError("bad number '" + std::string(text) + "'");
  return value;
}

std::string serialize_genome(const Genome& genome) {
  std::ostringstream out;
  out << kGenomeFormat << " v" << kGenomeFormatVersion << '\n';
  out << "key " << genome.key << '\n';
  out << "fitness " << (genome.fitness ? format_double(*genome.fitness) : "none") << '\n';
  for (const auto& n : genome.nodes) {
    out << "node " << n.id << ' ' << to_string(n.kind) << ' ' << to_string(n.activation) << ' '
        << format_double(n.bias) << ' ' << format_double(n.time_constant) << '\n';
  }
  for (const auto& c : genome.connections) {
    out << "conn " << c.innovation << ' ' << c.source << ' ' << c.target << ' ' << format_double(c.weight) << ' '
        << (c.enabled ? 1 : 0) << '\n';
  }
  out << "end\n";
  return out.str();
}

Genome deserialize_genome(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!next_data_line(in, line)) throw FormatError("empty genome record");
  const auto head = split_fields(line, ' ');
  if (head.size() != 2 || head[0] != kGenomeFormat) throw FormatError("not a genome record");
  if (head[1] != "v" + std::to_string(kGenomeFormatVersion))
    throw FormatError("unsupported genome record version '" + head[1] + "'");

  Genome g;
  bool ended = false;
  while (next_data_line(in, line)) {
    const auto f = split_fields(line, ' ');
    const std::string& tag = f[0];
    if (tag == "end") {
      ended = true;
      break;
    } else if (tag == "key" && f.size() == 2) {
      g.key = parse_int<std::uint64_t>(f[1]);
    } else if (tag == "fitness" && f.size() == 2) {
      if (f[1] == "none")
        g.fitness.reset();
      else
        g.fitness = parse_double(f[1]);
    } else if (tag == "node" && f.size() == 6) {
      g.nodes.push_back({parse_int<int>(f[1]), parse_double(f[4]), parse_double(f[5]), parse_activation(f[3]),
                         parse_node_kind(f[2])});
    } else if (tag == "conn" && f.size() == 6) {
      if (f[5] != "0" && f[5] != "1") throw FormatError("bad enabled flag '" + f[5] + "'");
      g.connections.push_back(
          {parse_int<int>(f[1]), parse_int<int>(f[2]), parse_int<int>(f[3]), parse_double(f[4]), f[5] == "1"});
    } else {
      throw FormatError("malformed genome line '" + line + "'");
    }
  }
  if (!ended) throw FormatError("genome record missing 'end'");
  try {
    validate(g);
  } catch (const StructuralError& e) {
    throw FormatError(std::string("invalid genome record: ") + e.what());
  }
  return g;
}

void write_genome_file(const std::filesystem::path& path, const Genome& genome) {
  write_text_file(path, serialize_genome(genome));
}

Genome read_genome_file(const std::filesystem::path& path) { return deserialize_genome(read_text_file(path)); }

void write_fitness_csv(std::ostream& out, const std::vector<GenerationRecord>& history) {
  out << "generation,best_fitness,species_s,species_r,reset\n";
  for (const auto& r : history) {
    out << r.generation << ',' << format_double(r.best_fitness) << ',' << r.sender_species << ','
        << r.receiver_species << ',' << (r.reset ? 1 : 0) << '\n';
  }
}

std::vector<GenerationRecord> read_fitness_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line) || line != "generation,best_fitness,species_s,species_r,reset")
    throw FormatError("unexpected fitness.csv header");
  std::vector<GenerationRecord> history;
  while (next_data_line(in, line)) {
    const auto f = split_fields(line, ',');
    if (f.size() != 5) throw FormatError("malformed fitness.csv row");
    history.push_back({parse_int<int>(f[0]), parse_double(f[1]), parse_int<int>(f[2]), parse_int<int>(f[3]),
                       parse_int<int>(f[4]) != 0});
  }
  return history;
}

void write_signals_csv(std::ostream& out, const SignalingSystem& system) {
  const std::size_t samples = system.signals.empty() ? kTimeWindow : system.signals.front().size();
  out << header_with_samples("concept", samples) << '\n';
  for (std::size_t i = 0; i < system.signals.size(); ++i) {
    out << i + 1;
    for (double v : system.signals[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

SignalingSystem read_signals_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw FormatError("empty signals.csv");
  const auto head = split_fields(line, ',');
  if (head.size() < 2 || head[0] != "concept") throw FormatError("unexpected signals.csv header");
  SignalingSystem system;
  while (next_data_line(in, line)) {
    const auto f = split_fields(line, ',');
    if (f.size() != head.size()) throw FormatError("malformed signals.csv row");
    if (parse_int<int>(f[0]) != static_cast<int>(system.signals.size()) + 1)
      throw FormatError("signals.csv concepts out of order");
    Signal s;
    for (std::size_t k = 1; k < f.size(); ++k) s.push_back(parse_double(f[k]));
    system.signals.push_back(std::move(s));
  }
  system.vocab_size = static_cast<int>(system.signals.size());
  return system;
}

void write_snapshots_csv(std::ostream& out, const std::vector<SignalingSystem>& snapshots) {
  std::size_t samples = kTimeWindow;
  if (!snapshots.empty() && !snapshots.front().signals.empty()) samples = snapshots.front().signals.front().size();
  out << header_with_samples("generation,concept", samples) << '\n';
  for (std::size_t g = 0; g < snapshots.size(); ++g) {
    for (std::size_t i = 0; i < snapshots[g].signals.size(); ++i) {
      out << g + 1 << ',' << i + 1;
      for (double v : snapshots[g].signals[i]) out << ',' << format_double(v);
      out << '\n';
    }
  }
}

std::vector<SignalingSystem> read_snapshots_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw FormatError("empty snapshots.csv");
  const auto head = split_fields(line, ',');
  if (head.size() < 3 || head[0] != "generation" || head[1] != "concept")
    throw FormatError("unexpected snapshots.csv header");
  std::vector<SignalingSystem> snapshots;
  while (next_data_line(in, line)) {
    const auto f = split_fields(line, ',');
    if (f.size() != head.size()) throw FormatError("malformed snapshots.csv row");
    const auto g = parse_int<std::size_t>(f[0]);
    if (g == snapshots.size() + 1) snapshots.emplace_back();
    if (g != snapshots.size()) throw FormatError("snapshots.csv generations out of order");
    Signal s;
    for (std::size_t k = 2; k < f.size(); ++k) s.push_back(parse_double(f[k]));
    snapshots.back().signals.push_back(std::move(s));
    snapshots.back().vocab_size = static_cast<int>(snapshots.back().signals.size());
  }
  return snapshots;
}

void write_constellation_csv(std::ostream& out, const Constellation2d& constellation) {
  out << "concept,x,y\n";
  for (std::size_t i = 0; i < constellation.points.size(); ++i) {
    out << i + 1 << ',' << format_double(constellation.points[i].first) << ','
        << format_double(constellation.points[i].second) << '\n';
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

}  // namespace sigcomm
