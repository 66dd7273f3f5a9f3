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

#ifndef STREAMSU_CONFIG_H_
#define STREAMSU_CONFIG_H_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "streamsu/lattice.h"
#include "streamsu/sim.h"

namespace streamsu {

// Everything a CLI run depends on besides its input files.
struct RunConfig {
  uint64_t seed = 7;
  int corpus_n = 100;
  DifficultyMix mix = {{0.2, 1.0}};
  bool write_lattices = false;
  SimConfig sim;

  // Throws InvalidConfig.
  void Validate() const;
};

// Overlays `j` onto `base`. Unknown keys and ill-typed values throw
// InvalidConfig naming the offending field.
RunConfig ParseRunConfig(const nlohmann::json& j, RunConfig base = {});
RunConfig LoadRunConfig(const std::string& path, RunConfig base = {});

// Full config, every field present; ParseRunConfig(ToJson(c)) == c.
nlohmann::json ToJson(const RunConfig& cfg);

// Numbers, or the strings "inf" / "+inf" / "-inf".
double ParseDouble(const nlohmann::json& j, const std::string& field);
nlohmann::json DoubleToJson(double v);

}  // namespace streamsu

#endif  // STREAMSU_CONFIG_H_
