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

#include "streamsu/scorer.h"

#include <algorithm>
#include <random>

#include "streamsu/errors.h"
#include "streamsu/log_math.h"
#include "streamsu/seeding.h"

namespace streamsu {

namespace {

// Normalizes `logits` in place; masked ids end at kLogZero.
void LogSoftmaxMasked(std::vector<double>& logits, const Vocab& vocab) {
  logits[vocab.blank_id] = kLogZero;
  logits[vocab.sos_id] = kLogZero;
  const double lse = LogSumExp(logits);
  for (double& x : logits) {
    if (x != kLogZero) x -= lse;
  }
}

}  // namespace

NgramScorer::NgramScorer(int order, Vocab vocab, uint64_t seed, NgramScorerConfig cfg)
    : order_(order), vocab_(std::move(vocab)), seed_(seed), cfg_(cfg) {
  if (order_ < 1) throw InvalidConfig("ngram scorer: order must be >= 1");
  vocab_.Validate();
}

std::vector<double> NgramScorer::Compute(std::span<const int> prefix,
                                         const EmissionLattice& context) const {
  const int history = order_ - 1;
  std::vector<int> key(history, vocab_.sos_id);
  const int take = std::min<int>(history, static_cast<int>(prefix.size()));
  std::copy(prefix.end() - take, prefix.end(), key.end() - take);

  std::mt19937_64 rng(DeriveSeed(seed_, key));
  std::normal_distribution<double> normal(0.0, cfg_.logit_sigma);
  std::vector<double> logits(vocab_.size());
  for (double& x : logits) x = normal(rng);

  const double generated = prefix.empty() ? 0.0 : static_cast<double>(prefix.size() - 1);
  const double expected = context.duration_s() * cfg_.tokens_per_second;
  logits[vocab_.eos_id] = cfg_.eos_bias + cfg_.eos_slope * (generated - expected);
  LogSoftmaxMasked(logits, vocab_);
  return logits;
}

TeacherScorer::TeacherScorer(const SyntheticUtterance& utt, double fidelity,
                             Vocab vocab, uint64_t seed, TeacherScorerConfig cfg)
    : truth_(utt.truth),
      alignment_(utt.alignment),
      fidelity_(fidelity),
      vocab_(std::move(vocab)),
      seed_(seed),
      cfg_(cfg) {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw InvalidConfig("teacher scorer: fidelity outside [0, 1]");
  }
  vocab_.Validate();
}

std::vector<double> TeacherScorer::Compute(std::span<const int> prefix,
                                           const EmissionLattice& context) const {
  size_t audible = 0;
  while (audible < alignment_.size() && alignment_[audible] < context.num_frames()) {
    ++audible;
  }
  const size_t position = prefix.empty() ? 0 : prefix.size() - 1;
  const int intended = position < audible ? truth_[position] : vocab_.eos_id;

  std::mt19937_64 rng(DeriveSeed(seed_, prefix));
  std::normal_distribution<double> normal(0.0, cfg_.logit_sigma);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double clip = 3.0 * cfg_.logit_sigma;

  std::vector<double> logits(vocab_.size());
  for (double& x : logits) x = std::clamp(normal(rng), -clip, clip);

  const bool faithful = unit(rng) < fidelity_;
  if (faithful) {
    logits[intended] += cfg_.peak;
  } else {
    std::vector<int> wrong;
    for (int id = 0; id < vocab_.size(); ++id) {
      if (id != intended && (vocab_.IsWord(id) || id == vocab_.eos_id)) wrong.push_back(id);
    }
    std::uniform_int_distribution<size_t> pick(0, wrong.size() - 1);
    logits[wrong[pick(rng)]] += cfg_.peak;
    logits[intended] += cfg_.residual * cfg_.peak;
  }
  LogSoftmaxMasked(logits, vocab_);
  return logits;
}

}  // namespace streamsu
