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

#include "streamsu/ctc.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "streamsu/errors.h"
#include "streamsu/log_math.h"
#include "test_util.h"

namespace streamsu {
namespace {

using testing::FromProbs;
using testing::RandomLattice;

// Token ids 1..V-1 are ordinary emissions; eos lives outside the lattice.
constexpr int kBlank = 0;
constexpr int kEos = 99;

// Near within `tol`, treating two -inf values as equal.
void ExpectLogNear(double a, double b, double tol) {
  if (a == kLogZero || b == kLogZero) {
    EXPECT_EQ(a, b);
  } else {
    EXPECT_NEAR(a, b, tol);
  }
}

std::vector<int> RandomPrefix(std::mt19937_64& rng, int len, int vocab) {
  std::uniform_int_distribution<int> tok(1, vocab - 1);
  std::vector<int> p(len);
  for (int& x : p) x = tok(rng);
  return p;
}

// Scores `tokens` one extension at a time and returns every psi.
std::vector<double> Chain(const CtcPrefixScorer& scorer, const std::vector<int>& tokens,
                          const EmissionLattice& lattice, CtcPrefixState* last = nullptr) {
  std::vector<double> psis;
  CtcPrefixState state = scorer.Init(lattice);
  for (int c : tokens) {
    CtcScore s = scorer.Extend(state, c, lattice);
    psis.push_back(s.psi);
    state = std::move(s.state);
  }
  if (last) *last = state;
  return psis;
}

TEST(CtcInitTest, SingleFrame) {
  const EmissionLattice lat = FromProbs({{0.5, 0.25, 0.25}});
  const CtcPrefixState s = CtcPrefixScorer(kBlank, kEos).Init(lat);
  ASSERT_EQ(s.frames_scored, 1);
  EXPECT_DOUBLE_EQ(s.r_b[0], std::log(0.5));
  EXPECT_EQ(s.r_n[0], kLogZero);
  EXPECT_FALSE(s.last_token.has_value());
}

TEST(CtcInitTest, CertainBlanks) {
  const EmissionLattice lat = FromProbs({{1.0, 0.0}, {1.0, 0.0}});
  const CtcPrefixState s = CtcPrefixScorer(kBlank, kEos).Init(lat);
  EXPECT_EQ(s.r_b[0], 0.0);
  EXPECT_EQ(s.r_b[1], 0.0);
}

TEST(CtcInitTest, BlankProductOracle) {
  const EmissionLattice lat = RandomLattice(12, 5, 4);
  const CtcPrefixState s = CtcPrefixScorer(kBlank, kEos).Init(lat);
  double prod = 1.0;
  for (int t = 0; t < lat.num_frames(); ++t) {
    prod *= std::exp(lat.at(t, kBlank));
    EXPECT_NEAR(std::exp(s.r_b[t]), prod, 1e-15);
  }
}

TEST(CtcExtendTest, MatchesBruteForce) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  std::mt19937_64 rng(21);
  for (int seed = 0; seed < 60; ++seed) {
    const int frames = 1 + seed % 7;
    const int vocab = 2 + seed % 3;
    const EmissionLattice lat = RandomLattice(frames, vocab, seed);
    const std::vector<int> tokens = RandomPrefix(rng, 1 + seed % 3, vocab);
    const std::vector<double> psis = Chain(scorer, tokens, lat);
    for (size_t k = 0; k < tokens.size(); ++k) {
      const std::vector<int> head(tokens.begin(), tokens.begin() + k + 1);
      ExpectLogNear(psis[k], CtcBruteForcePrefix(head, lat, kBlank), 1e-9);
    }
  }
}

TEST(CtcExtendTest, EosIsExactSequenceProbability) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  std::mt19937_64 rng(5);
  for (int seed = 0; seed < 40; ++seed) {
    const EmissionLattice lat = RandomLattice(6, 4, 100 + seed);
    const std::vector<int> tokens = RandomPrefix(rng, seed % 4, 4);
    CtcPrefixState state;
    Chain(scorer, tokens, lat, &state);
    const CtcScore eos = scorer.Extend(state, kEos, lat);
    ExpectLogNear(eos.psi, CtcBruteForceExact(tokens, lat, kBlank), 1e-9);
    EXPECT_TRUE(eos.state.empty());
  }
}

TEST(CtcExtendTest, EosOnAllBlankLattice) {
  const EmissionLattice lat = FromProbs({{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}});
  const CtcPrefixScorer scorer(kBlank, kEos);
  EXPECT_EQ(scorer.Extend(scorer.Init(lat), kEos, lat).psi, 0.0);
}

TEST(CtcExtendTest, ImpossibleTokenGivesLogZero) {
  const EmissionLattice lat = FromProbs({{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}});
  const CtcPrefixScorer scorer(kBlank, kEos);
  const CtcScore s = scorer.Extend(scorer.Init(lat), 2, lat);
  EXPECT_EQ(s.psi, kLogZero);
  for (double x : s.state.r_n) EXPECT_FALSE(std::isnan(x));
}

TEST(CtcExtendTest, RejectsBlankAndStaleState) {
  const EmissionLattice lat = RandomLattice(5, 3, 1);
  const CtcPrefixScorer scorer(kBlank, kEos);
  EXPECT_THROW(scorer.Extend(scorer.Init(lat), kBlank, lat), InvalidToken);
  const CtcPrefixState short_state = scorer.Init(lat.Prefix(3));
  EXPECT_THROW(scorer.Extend(short_state, 1, lat), InvalidState);
}

// Children (plus eos) partition the parent's probability mass.
TEST(CtcExtendTest, ChildrenSumToParentMass) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  std::mt19937_64 rng(8);
  for (int seed = 0; seed < 30; ++seed) {
    const int vocab = 3 + seed % 3;
    const EmissionLattice lat = RandomLattice(7, vocab, 300 + seed);
    const std::vector<int> g = RandomPrefix(rng, seed % 3, vocab);
    CtcPrefixState parent;
    const std::vector<double> chain = Chain(scorer, g, lat, &parent);
    const double parent_psi = g.empty() ? 0.0 : chain.back();
    double mass = std::exp(scorer.Extend(parent, kEos, lat).psi);
    for (int c = 1; c < vocab; ++c) mass += std::exp(scorer.Extend(parent, c, lat).psi);
    EXPECT_LE(mass, std::exp(parent_psi) + 1e-9);
    EXPECT_NEAR(mass, std::exp(parent_psi), 1e-9);
  }
}

TEST(CtcExtendTest, NoUnderflowOnLongLattice) {
  // 400 frames of p(blank)=0.01 multiply to 1e-800, below double range in
  // the linear domain.
  std::vector<std::vector<double>> probs(400, {0.01, 0.99});
  const EmissionLattice lat = FromProbs(probs);
  const CtcPrefixScorer scorer(kBlank, kEos);
  const CtcPrefixState s = scorer.Init(lat);
  EXPECT_TRUE(std::isfinite(s.r_b.back()));
  EXPECT_NEAR(s.r_b.back(), 400 * std::log(0.01), 1e-9);
  const CtcScore one = scorer.Extend(s, 1, lat);
  EXPECT_TRUE(std::isfinite(one.psi));
}

TEST(CtcBruteForceTest, EmptyPrefixAndTooLong) {
  const EmissionLattice lat = RandomLattice(3, 3, 2);
  EXPECT_NEAR(CtcBruteForcePrefix({}, lat, kBlank), 0.0, 1e-12);
  const std::vector<int> four = {1, 2, 1, 2};
  EXPECT_EQ(CtcBruteForcePrefix(four, lat, kBlank), kLogZero);
}

TEST(CtcBruteForceTest, SizeGuard) {
  const EmissionLattice lat = RandomLattice(20, 5, 2);
  EXPECT_THROW(CtcBruteForcePrefix({}, lat, kBlank), TooLarge);
}

TEST(CtcLeapTest, Boundary) {
  EXPECT_EQ(CtcPrefixScorer::LeapBoundary(10, 0.5), 5);
  EXPECT_EQ(CtcPrefixScorer::LeapBoundary(11, 0.5), 5);
  EXPECT_EQ(CtcPrefixScorer::LeapBoundary(10, 1.0), 10);
  EXPECT_EQ(CtcPrefixScorer::LeapBoundary(25, 0.8), 20);
}

struct LeapCase {
  EmissionLattice full;
  CtcPrefixState parent_full;
  CtcPrefixState cached_child;
  int c = 0;
};

LeapCase MakeLeapCase(const CtcPrefixScorer& scorer, const EmissionLattice& full,
                      const EmissionLattice& pilot, const std::vector<int>& g, int c) {
  LeapCase lc;
  lc.full = full;
  lc.c = c;
  Chain(scorer, g, full, &lc.parent_full);
  CtcPrefixState parent_pilot;
  Chain(scorer, g, pilot, &parent_pilot);
  lc.cached_child = scorer.Extend(parent_pilot, c, pilot).state;
  return lc;
}

TEST(CtcLeapTest, ExactOnSharedPrefix) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  std::mt19937_64 rng(13);
  for (int seed = 0; seed < 50; ++seed) {
    const int frames = 20 + seed % 15;
    const EmissionLattice full = RandomLattice(frames, 6, 500 + seed);
    const int pilot_frames = frames / 2 + seed % 5;
    const double q = (seed % 2) ? 1.0 : 0.8;
    const std::vector<int> g = RandomPrefix(rng, seed % 4, 6);
    const int c = 1 + seed % 5;
    const LeapCase lc = MakeLeapCase(scorer, full, full.Prefix(pilot_frames), g, c);
    const CtcScore exact = scorer.Extend(lc.parent_full, c, full);
    const CtcScore leap = scorer.ExtendLeap(lc.parent_full, lc.cached_child, c, full, q);
    EXPECT_NEAR(leap.psi, exact.psi, 1e-12);
    EXPECT_EQ(leap.frames_computed,
              frames - static_cast<int>(std::floor(pilot_frames * q + 1e-9)));
    EXPECT_EQ(exact.frames_computed, frames);
    for (int t = 0; t < frames; ++t) {
      ExpectLogNear(leap.state.r_n[t], exact.state.r_n[t], 1e-12);
      ExpectLogNear(leap.state.r_b[t], exact.state.r_b[t], 1e-12);
      ExpectLogNear(leap.state.psi_acc[t], exact.state.psi_acc[t], 1e-12);
    }
  }
}

TEST(CtcLeapTest, HalfQHalvesReusedSpan) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  const EmissionLattice full = RandomLattice(40, 5, 77);
  const LeapCase lc = MakeLeapCase(scorer, full, full.Prefix(30), {2}, 3);
  const CtcScore leap = scorer.ExtendLeap(lc.parent_full, lc.cached_child, 3, full, 0.5);
  EXPECT_EQ(leap.frames_computed, 40 - 15);
}

// Rows cached on a perturbed pilot lattice make leap approximate. The error
// is only measured here; nothing bounds it.
TEST(CtcLeapTest, PerturbedPrefixIsApproximate) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  double worst = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    const EmissionLattice full = RandomLattice(30, 5, 900 + seed);
    EmissionLattice pilot = full.Prefix(20);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    for (int t = 0; t < 20; ++t) {
      auto row = pilot.row(t);
      for (double& x : row) x += noise(rng);
      const double lse = LogSumExp(row);
      for (double& x : row) x -= lse;
    }
    const LeapCase lc = MakeLeapCase(scorer, full, pilot, {1}, 2);
    const CtcScore exact = scorer.Extend(lc.parent_full, 2, full);
    const CtcScore leap = scorer.ExtendLeap(lc.parent_full, lc.cached_child, 2, full, 0.8);
    worst = std::max(worst, std::abs(leap.psi - exact.psi));
    // Frames at and beyond the boundary are recomputed; the error enters
    // only through the reused rows.
    EXPECT_EQ(leap.frames_computed, 30 - 16);
  }
  EXPECT_GT(worst, 0.0);
  RecordProperty("max_abs_leap_error", std::to_string(worst));
}

TEST(CtcLeapTest, RejectsBadArguments) {
  const CtcPrefixScorer scorer(kBlank, kEos);
  const EmissionLattice full = RandomLattice(10, 4, 3);
  const LeapCase lc = MakeLeapCase(scorer, full, full.Prefix(8), {1}, 2);
  EXPECT_THROW(scorer.ExtendLeap(lc.parent_full, lc.cached_child, 2, full, 0.2), InvalidState);
  const EmissionLattice shorter = full.Prefix(5);
  CtcPrefixState parent_short;
  Chain(scorer, {1}, shorter, &parent_short);
  EXPECT_THROW(scorer.ExtendLeap(parent_short, lc.cached_child, 2, shorter, 1.0), InvalidState);
}

}  // namespace
}  // namespace streamsu
