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

#include "streamsu/metrics.h"

#include <algorithm>
#include <functional>
#include <random>

#include "gtest/gtest.h"
#include "streamsu/errors.h"

namespace streamsu {
namespace {

// Plain recursive Levenshtein distance.
int NaiveDistance(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());
  const int sub = NaiveDistance(a.subspan(1), b.subspan(1)) + (a[0] != b[0]);
  const int del = NaiveDistance(a.subspan(1), b) + 1;
  const int ins = NaiveDistance(a, b.subspan(1)) + 1;
  return std::min({sub, del, ins});
}

std::vector<std::vector<int>> AllSequences(int max_len, int vocab) {
  std::vector<std::vector<int>> out = {{}};
  for (size_t i = 0; i < out.size(); ++i) {
    if (static_cast<int>(out[i].size()) == max_len) continue;
    for (int c = 0; c < vocab; ++c) {
      std::vector<int> next = out[i];
      next.push_back(c);
      out.push_back(std::move(next));
    }
  }
  return out;
}

TEST(EditDistanceTest, Identity) {
  const std::vector<int> ref = {1, 2, 3};
  const WerBreakdown w = EditDistance(ref, ref);
  EXPECT_EQ(w.errors(), 0);
  EXPECT_EQ(w.wer(), 0.0);
}

TEST(EditDistanceTest, TurnOffTheLight) {
  enum { kTurn = 1, kOn, kOff, kThe, kLight };
  const std::vector<int> ref = {kTurn, kOn, kThe, kLight};
  const std::vector<int> hyp = {kTurn, kOff, kLight};
  const WerBreakdown w = EditDistance(ref, hyp);
  EXPECT_EQ(w.substitutions, 1);
  EXPECT_EQ(w.deletions, 1);
  EXPECT_EQ(w.insertions, 0);
  EXPECT_DOUBLE_EQ(w.wer(), 0.5);
}

TEST(EditDistanceTest, EmptyHypothesis) {
  const std::vector<int> ref = {4, 5, 6, 7};
  const WerBreakdown w = EditDistance(ref, {});
  EXPECT_EQ(w.deletions, 4);
  EXPECT_EQ(w.wer(), 1.0);
}

TEST(EditDistanceTest, EmptyReferenceThrows) {
  const std::vector<int> hyp = {1};
  EXPECT_THROW(EditDistance({}, hyp), InvalidReference);
}

// Exhaustive over a 3-token vocabulary, lengths up to 5 on both sides; the
// acceptance binary goes to 6.
TEST(EditDistanceTest, MatchesRecursiveOracle) {
  const auto seqs = AllSequences(5, 3);
  for (const auto& ref : seqs) {
    if (ref.empty()) continue;
    for (const auto& hyp : seqs) {
      const WerBreakdown w = EditDistance(ref, hyp);
      ASSERT_EQ(w.errors(), NaiveDistance(ref, hyp));
      ASSERT_EQ(w.ref_len, static_cast<int>(ref.size()));
      // The breakdown must describe a real alignment.
      ASSERT_EQ(static_cast<int>(ref.size()) - w.deletions + w.insertions,
                static_cast<int>(hyp.size()));
    }
  }
}

TEST(EditDistanceTest, TriangleInequality) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> len(1, 7), tok(0, 3);
  auto draw = [&] {
    std::vector<int> s(len(rng));
    for (int& x : s) x = tok(rng);
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    const int ab = EditDistance(a, b).errors();
    const int bc = EditDistance(b, c).errors();
    const int ac = EditDistance(a, c).errors();
    EXPECT_LE(ac, ab + bc);
    EXPECT_EQ(ab, EditDistance(b, a).errors());
  }
}

TEST(StatsTest, MeanAndQuantile) {
  const std::vector<double> xs = {4, 1, 3, 2};
  EXPECT_DOUBLE_EQ(Mean(xs), 2.5);
  EXPECT_DOUBLE_EQ(Quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(Quantile(xs, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(Quantile(xs, 0.5), 2.5);
}

TEST(StatsTest, Spearman) {
  const std::vector<double> a = {1, 2, 3, 4, 5};
  const std::vector<double> up = {10, 20, 30, 40, 50};
  const std::vector<double> down = {5, 4, 3, 2, 1};
  EXPECT_NEAR(SpearmanCorrelation(a, up), 1.0, 1e-12);
  EXPECT_NEAR(SpearmanCorrelation(a, down), -1.0, 1e-12);
}

}  // namespace
}  // namespace streamsu
