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

#include <cmath>
#include <random>

#include "streamsu/errors.h"
#include "streamsu/seeding.h"

namespace streamsu {

namespace {

Matrix RandomMatrix(int rows, int cols, double scale, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace

void EncoderConfig::Validate() const {
  if (conv_layers < 1) throw InvalidConfig("encoder.conv_layers must be >= 1");
  if (attn_layers < 1) throw InvalidConfig("encoder.attn_layers must be >= 1");
  if (kernel < 1) throw InvalidConfig("encoder.kernel must be >= 1");
  if (dim < 1) throw InvalidConfig("encoder.dim must be >= 1");
}

LateContextEncoder::LateContextEncoder(EncoderConfig cfg) : cfg_(cfg) {
  cfg_.Validate();
  const int d = cfg_.dim;
  const double conv_scale = 1.0 / std::sqrt(static_cast<double>(d * cfg_.kernel));
  for (int l = 0; l < cfg_.conv_layers; ++l) {
    std::vector<Matrix> taps;
    for (int k = 0; k < cfg_.kernel; ++k) {
      taps.push_back(RandomMatrix(d, d, conv_scale, DeriveSeed({cfg_.seed, 1, uint64_t(l), uint64_t(k)})));
    }
    conv_weights_.push_back(std::move(taps));
    conv_bias_.push_back(RandomMatrix(d, 1, 0.1, DeriveSeed({cfg_.seed, 2, uint64_t(l)})).col(0));
  }
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int l = 0; l < cfg_.attn_layers; ++l) {
    AttentionWeights w;
    w.wq = RandomMatrix(d, d, attn_scale, DeriveSeed({cfg_.seed, 3, uint64_t(l)}));
    w.wk = RandomMatrix(d, d, attn_scale, DeriveSeed({cfg_.seed, 4, uint64_t(l)}));
    w.wv = RandomMatrix(d, d, attn_scale, DeriveSeed({cfg_.seed, 5, uint64_t(l)}));
    w.wo = RandomMatrix(d, d, attn_scale, DeriveSeed({cfg_.seed, 6, uint64_t(l)}));
    attn_.push_back(std::move(w));
  }
}

SegmentCache LateContextEncoder::NewCache() const {
  SegmentCache cache;
  cache.rings.resize(cfg_.conv_layers);
  return cache;
}

Vector LateContextEncoder::ConvFrame(int layer, const std::deque<Vector>& ring,
                                     const Vector& x) const {
  // Tap 0 is the current frame, tap k the frame k steps back; frames before
  // the start of the stream are zero.
  Vector acc = conv_bias_[layer];
  acc.noalias() += conv_weights_[layer][0] * x;
  const int history = static_cast<int>(ring.size());
  for (int k = 1; k < cfg_.kernel && k <= history; ++k) {
    acc.noalias() += conv_weights_[layer][k] * ring[history - k];
  }
  return x + cfg_.residual_scale * acc.array().tanh().matrix();
}

std::pair<SegmentCache, Matrix> LateContextEncoder::EncodeSegment(
    const SegmentCache& cache, const Matrix& segment) const {
  if (segment.rows() > 0 && segment.cols() != cfg_.dim) {
    throw ShapeError("encoder: segment width does not match dim");
  }
  if (static_cast<int>(cache.rings.size()) != cfg_.conv_layers) {
    throw ShapeError("encoder: cache layer count does not match config");
  }
  SegmentCache next = cache;
  Matrix out(segment.rows(), cfg_.dim);
  const size_t max_ring = static_cast<size_t>(cfg_.kernel - 1);
  for (Eigen::Index t = 0; t < segment.rows(); ++t) {
    Vector x = segment.row(t).transpose();
    for (int l = 0; l < cfg_.conv_layers; ++l) {
      Vector y = ConvFrame(l, next.rings[l], x);
      std::deque<Vector>& ring = next.rings[l];
      if (max_ring > 0) {
        ring.push_back(std::move(x));
        if (ring.size() > max_ring) ring.pop_front();
      }
      x = std::move(y);
    }
    out.row(t) = x.transpose();
    ++next.frames_seen;
  }
  return {std::move(next), std::move(out)};
}

LatentSequence LateContextEncoder::Contextualize(const LatentSequence& conv_out) const {
  if (conv_out.num_frames() == 0) throw ShapeError("encoder: empty input to attention");
  if (conv_out.values.cols() != cfg_.dim) throw ShapeError("encoder: latent width mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(cfg_.dim));
  Matrix z = conv_out.values;
  for (const AttentionWeights& w : attn_) {
    const Matrix q = z * w.wq;
    const Matrix k = z * w.wk;
    const Matrix v = z * w.wv;
    Matrix scores = (q * k.transpose()) * inv_sqrt_d;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      const double m = scores.row(i).maxCoeff();
      scores.row(i) = (scores.row(i).array() - m).exp().matrix();
      scores.row(i) /= scores.row(i).sum();
    }
    z = z + cfg_.residual_scale * ((scores * v) * w.wo);
  }
  return LatentSequence{std::move(z)};
}

EmissionLattice LateContextEncoder::ProjectCtc(const LatentSequence& z, const Vocab& vocab,
                                               double frame_duration) const {
  const int d = cfg_.dim;
  const int vsize = vocab.size();
  if (z.values.cols() != d) throw ShapeError("encoder: latent width mismatch");
  Matrix proj = RandomMatrix(d, vsize, 0.05, DeriveSeed({cfg_.seed, 7, uint64_t(vsize)}));
  for (int i = 0; i < std::min(d, vsize); ++i) proj(i, i) += 1.0;
  const Matrix logits = cfg_.ctc_gain * (z.values * proj);
  const int num_frames = z.num_frames();
  EmissionLattice lattice(num_frames, vsize, frame_duration);
  for (int t = 0; t < num_frames; ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    for (int c = 0; c < vsize; ++c) lattice.at(t, c) = logits(t, c) - lse;
  }
  return lattice;
}

FlopsReport EncoderFlops(const EncoderConfig& cfg, int num_frames, int vocab_size) {
  const double t = num_frames;
  const double d = cfg.dim;
  FlopsReport r;
  r.streaming = cfg.conv_layers * t * (2.0 * cfg.kernel * d * d + 3.0 * d);
  // Q, K, V, O projections plus score and mixing matmuls.
  const double per_attn = 8.0 * t * d * d + 4.0 * t * t * d;
  r.non_streaming = cfg.attn_layers * per_attn + 2.0 * t * d * vocab_size;
  return r;
}

FlopsReport LateContextEncoder::Flops(int num_frames, int vocab_size) const {
  return EncoderFlops(cfg_, num_frames, vocab_size);
}

Matrix FeaturesFromLattice(const EmissionLattice& lattice) {
  Matrix m(lattice.num_frames(), lattice.vocab_size());
  for (int t = 0; t < lattice.num_frames(); ++t) {
    for (int c = 0; c < lattice.vocab_size(); ++c) m(t, c) = std::exp(lattice.at(t, c));
  }
  return m;
}

}  // namespace streamsu
