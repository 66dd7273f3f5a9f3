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

#ifndef STREAMSU_TESTS_TEST_UTIL_H_
#define STREAMSU_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "streamsu/lattice.h"
#include "streamsu/log_math.h"
#include "streamsu/scorer.h"

namespace streamsu {
namespace testing {

// Rows are softmax(N(0, sharpness^2)) with `blank_boost` added to column 0.
inline EmissionLattice RandomLattice(int frames, int vocab_size, uint64_t seed,
                                     double sharpness = 1.5, double blank_boost = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sharpness);
  EmissionLattice lattice(frames, vocab_size, 0.04);
  for (int t = 0; t < frames; ++t) {
    auto row = lattice.row(t);
    for (int c = 0; c < vocab_size; ++c) row[c] = normal(rng) + (c == 0 ? blank_boost : 0.0);
    const double lse = LogSumExp(row);
    for (double& x : row) x -= lse;
  }
  return lattice;
}

// Lattice from probability rows.
inline EmissionLattice FromProbs(const std::vector<std::vector<double>>& probs) {
  const int frames = static_cast<int>(probs.size());
  const int v = frames ? static_cast<int>(probs[0].size()) : 0;
  EmissionLattice lattice(frames, v, 0.04);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < v; ++c) lattice.at(t, c) = std::log(probs[t][c]);
  }
  return lattice;
}

// Scorer driven by a callback, for scripted decoding scenarios.
class ScriptedScorer : public AttnScorer {
 public:
  using Fn = std::function<std::vector<double>(std::span<const int>, const EmissionLattice&)>;
  explicit ScriptedScorer(Fn fn) : fn_(std::move(fn)) {}

 protected:
  std::vector<double> Compute(std::span<const int> prefix,
                              const EmissionLattice& context) const override {
    return fn_(prefix, context);
  }

 private:
  Fn fn_;
};

// Log-softmax of `logits`.
inline std::vector<double> LogSoftmax(std::vector<double> logits) {
  const double lse = LogSumExp(logits);
  for (double& x : logits) x -= lse;
  return logits;
}

}  // namespace testing
}  // namespace streamsu

#endif  // STREAMSU_TESTS_TEST_UTIL_H_
