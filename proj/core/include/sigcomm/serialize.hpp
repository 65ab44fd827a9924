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

#ifndef SIGCOMM_SERIALIZE_HPP_
#define SIGCOMM_SERIALIZE_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sigcomm/analysis.hpp"
#include "sigcomm/coevolution.hpp"
#include "sigcomm/genome.hpp"

namespace sigcomm {

inline constexpr std::string_view kGenomeFormat = "sigcomm-genome";
inline constexpr int kGenomeFormatVersion = 1;

// Shortest text that parses back to the same double. Infinities are written
// as "inf" / "-inf".
std::string format_double(double value);
double parse_double(std::string_view text);

// Line-oriented record:
//
//   sigcomm-genome v1
//   key <u64>
//   fitness <real>|none
//   node <id> <kind> <activation> <bias> <time_constant>
//   conn <innovation> <source> <target> <weight> <enabled 0|1>
//   end
//
// Throws FormatError on a version mismatch or a malformed record.
std::string serialize_genome(const Genome& genome);
Genome deserialize_genome(std::string_view text);

void write_genome_file(const std::filesystem::path& path, const Genome& genome);
Genome read_genome_file(const std::filesystem::path& path);

// fitness.csv: generation,best_fitness,species_s,species_r,reset
void write_fitness_csv(std::ostream& out, const std::vector<GenerationRecord>& history);
std::vector<GenerationRecord> read_fitness_csv(std::istream& in);

// signals.csv: concept,t0..t(n-1)
void write_signals_csv(std::ostream& out, const SignalingSystem& system);
SignalingSystem read_signals_csv(std::istream& in);

// snapshots.csv: generation,concept,t0..t(n-1)
void write_snapshots_csv(std::ostream& out, const std::vector<SignalingSystem>& snapshots);
std::vector<SignalingSystem> read_snapshots_csv(std::istream& in);

// constellation.csv: concept,x,y
void write_constellation_csv(std::ostream& out, const Constellation2d& constellation);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sigcomm

#endif  // SIGCOMM_SERIALIZE_HPP_
