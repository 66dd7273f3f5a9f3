/* Copyright 2026 The streamsu Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef STREAMSU_IO_H_
#define STREAMSU_IO_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "streamsu/lattice.h"
#include "streamsu/sim.h"

namespace streamsu {

inline constexpr char kCorpusFormat[] = "streamsu.corpus";
inline constexpr int kCorpusVersion = 1;

struct Corpus {
  uint64_t seed = 0;
  Vocab vocab;
  LatticeConfig lattice;
  std::vector<SyntheticUtterance> utterances;
  // Pre-rendered emissions, parallel to `utterances`, when stored.
  std::vector<EmissionLattice> lattices;

  // The stored lattice if present, else one rendered from the utterance.
  EmissionLattice LatticeFor(size_t i) const;
};

nlohmann::json CorpusToJson(const Corpus& corpus, bool with_lattices);
// Throws InvalidConfig on schema violations and InvalidUtterance on bad
// utterances.
Corpus CorpusFromJson(const nlohmann::json& j);

void WriteCorpus(const std::string& path, const Corpus& corpus, bool with_lattices);
Corpus ReadCorpus(const std::string& path);

// One run-log line.
nlohmann::json UtteranceRecord(const UtteranceReport& report);

// Per-utterance local decode rows.
const std::vector<std::string>& DecodeColumns();
void WriteDecodeCsv(std::ostream& out, const std::vector<UtteranceReport>& reports);

// Stable column order; the header never changes between runs.
const std::vector<std::string>& AggregateColumns();
void WriteAggregateCsv(std::ostream& out, const std::vector<AggregateRow>& rows);
// Shortest representation that round-trips.
std::string FormatDouble(double v);

std::string TokensToString(const std::vector<int>& tokens, const Vocab& vocab);

}  // namespace streamsu

#endif  // STREAMSU_IO_H_
