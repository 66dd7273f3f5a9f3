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

#include "streamsu/encoder.h"

#include <random>

#include "gtest/gtest.h"
#include "streamsu/errors.h"

namespace streamsu {
namespace {

Matrix RandomInput(int frames, int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(frames, dim);
  for (int t = 0; t < frames; ++t) {
    for (int j = 0; j < dim; ++j) m(t, j) = normal(rng);
  }
  return m;
}

Matrix EncodeInChunks(const LateContextEncoder& enc, const Matrix& input,
                      const std::vector<int>& sizes) {
  SegmentCache cache = enc.NewCache();
  Matrix out(input.rows(), input.cols());
  int start = 0;
  for (int len : sizes) {
    auto [next, y] = enc.EncodeSegment(cache, input.middleRows(start, len));
    out.middleRows(start, len) = y;
    cache = std::move(next);
    start += len;
  }
  EXPECT_EQ(cache.frames_seen, input.rows());
  return out;
}

std::vector<int> RandomSegmentation(int frames, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(0, 9);
  std::vector<int> sizes;
  for (int left = frames; left > 0;) {
    const int n = std::min(left, len(rng));
    sizes.push_back(n);  // zero-length segments included on purpose
    left -= n;
  }
  return sizes;
}

EncoderConfig SmallConfig() {
  EncoderConfig cfg;
  cfg.dim = 8;
  cfg.conv_layers = 3;
  cfg.kernel = 4;
  cfg.attn_layers = 2;
  return cfg;
}

TEST(EncodeSegmentTest, AnySegmentationIsBitwiseEqual) {
  const LateContextEncoder enc(SmallConfig());
  std::mt19937_64 rng(3);
  for (uint64_t i = 0; i < 5; ++i) {
    const Matrix input = RandomInput(37, 8, i);
    const Matrix whole = EncodeInChunks(enc, input, {37});
    EXPECT_EQ(EncodeInChunks(enc, input, std::vector<int>(37, 1)), whole);
    for (int s = 0; s < 10; ++s) {
      EXPECT_EQ(EncodeInChunks(enc, input, RandomSegmentation(37, rng)), whole);
    }
  }
}

TEST(EncodeSegmentTest, EmptySegmentLeavesCache) {
  const LateContextEncoder enc(SmallConfig());
  auto [cache, first] = enc.EncodeSegment(enc.NewCache(), RandomInput(5, 8, 1));
  auto [same, empty] = enc.EncodeSegment(cache, Matrix(0, 8));
  EXPECT_EQ(empty.rows(), 0);
  EXPECT_EQ(same.frames_seen, cache.frames_seen);
  ASSERT_EQ(same.rings.size(), cache.rings.size());
  for (size_t l = 0; l < cache.rings.size(); ++l) {
    ASSERT_EQ(same.rings[l].size(), cache.rings[l].size());
    for (size_t k = 0; k < cache.rings[l].size(); ++k) {
      EXPECT_EQ(same.rings[l][k], cache.rings[l][k]);
    }
  }
}

TEST(EncodeSegmentTest, Causal) {
  const LateContextEncoder enc(SmallConfig());
  Matrix input = RandomInput(20, 8, 9);
  const Matrix base = EncodeInChunks(enc, input, {20});
  input(15, 2) += 1.0;
  const Matrix moved = EncodeInChunks(enc, input, {20});
  EXPECT_EQ(base.topRows(15), moved.topRows(15));
  EXPECT_NE(base.row(15), moved.row(15));
}

TEST(EncodeSegmentTest, RejectsWrongWidth) {
  const LateContextEncoder enc(SmallConfig());
  EXPECT_THROW(enc.EncodeSegment(enc.NewCache(), RandomInput(3, 5, 0)), ShapeError);
}

TEST(ContextualizeTest, LastFrameReachesFirstOutput) {
  const LateContextEncoder enc(SmallConfig());
  LatentSequence z{RandomInput(16, 8, 4)};
  const LatentSequence a = enc.Contextualize(z);
  z.values(15, 0) += 0.5;
  const LatentSequence b = enc.Contextualize(z);
  EXPECT_NE(a.values.row(0), b.values.row(0));
}

TEST(ContextualizeTest, DeterministicAndPrefixSensitive) {
  const LateContextEncoder enc(SmallConfig());
  const LatentSequence z{RandomInput(24, 8, 5)};
  EXPECT_EQ(enc.Contextualize(z).values, enc.Contextualize(z).values);
  const LatentSequence head{z.values.topRows(12)};
  const Matrix full_head = enc.Contextualize(z).values.topRows(12);
  EXPECT_GT((enc.Contextualize(head).values - full_head).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ProjectCtcTest, NormalizedRows) {
  EncoderConfig cfg = SmallConfig();
  const Vocab vocab = Vocab::Default(5);
  cfg.dim = vocab.size();
  const LateContextEncoder enc(cfg);
  const LatentSequence z{RandomInput(30, cfg.dim, 6)};
  const EmissionLattice lat = enc.ProjectCtc(enc.Contextualize(z), vocab);
  EXPECT_EQ(lat.num_frames(), 30);
  EXPECT_EQ(lat.vocab_size(), vocab.size());
  EXPECT_LE(lat.MaxNormalizationError(), 1e-6);
  EXPECT_EQ(lat, enc.ProjectCtc(enc.Contextualize(z), vocab));
}

TEST(ProjectCtcTest, NearIdentityKeepsGreedyPath) {
  const Vocab vocab = Vocab::Default();
  EncoderConfig cfg;
  const LateContextEncoder enc(cfg);
  SyntheticUtterance u;
  u.truth = {4, 9, 4};
  u.alignment = {10, 25, 40};
  u.duration_s = 2.0;
  const EmissionLattice lat = MakeLattice(u, vocab);
  const Matrix feats = FeaturesFromLattice(lat);
  auto [cache, conv] = enc.EncodeSegment(enc.NewCache(), feats);
  const EmissionLattice out = enc.ProjectCtc(enc.Contextualize({conv}), vocab);
  EXPECT_EQ(GreedyCtcDecode(out, vocab.blank_id), u.truth);
}

TEST(FlopsTest, StreamingFractionGrowsWithConvDepth) {
  EncoderConfig cfg;
  double prev = 0.0;
  for (int layers = 1; layers <= 12; ++layers) {
    cfg.conv_layers = layers;
    const FlopsReport r = EncoderFlops(cfg, 100, 27);
    EXPECT_GT(r.streaming_fraction(), prev);
    prev = r.streaming_fraction();
  }
}

TEST(FlopsTest, MatchesEncoderInstance) {
  const EncoderConfig cfg = SmallConfig();
  const LateContextEncoder enc(cfg);
  const FlopsReport a = enc.Flops(50, 8);
  const FlopsReport b = EncoderFlops(cfg, 50, 8);
  EXPECT_EQ(a.streaming, b.streaming);
  EXPECT_EQ(a.non_streaming, b.non_streaming);
  EXPECT_GT(a.streaming, 0.0);
}

}  // namespace
}  // namespace streamsu
