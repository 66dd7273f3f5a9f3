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

#ifndef STREAMSU_ENCODER_H_
#define STREAMSU_ENCODER_H_

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "streamsu/lattice.h"

namespace streamsu {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct EncoderConfig {
  int conv_layers = 6;
  int kernel = 5;
  int attn_layers = 3;
  int dim = 27;
  uint64_t seed = 7;
  // Residual branch gain of every layer; small keeps the encoder close to
  // identity so encoded lattices stay decodable.
  double residual_scale = 0.1;
  double ctc_gain = 10.0;

  // Throws InvalidConfig.
  void Validate() const;
};

// Per conv layer, the trailing (kernel - 1) inputs seen so far.
struct SegmentCache {
  std::vector<std::deque<Vector>> rings;
  int64_t frames_seen = 0;
};

struct LatentSequence {
  Matrix values;  // T x dim

  int num_frames() const { return static_cast<int>(values.rows()); }
};

struct FlopsReport {
  double streaming = 0.0;      // causal conv stack, run during ingestion
  double non_streaming = 0.0;  // attention stack and CTC projection
  double streaming_fraction() const {
    const double total = streaming + non_streaming;
    return total == 0.0 ? 0.0 : streaming / total;
  }
};

// Causal convolution bottom stage that can run segment by segment, plus a
// full-context attention top stage and a CTC projection. Weights are seeded
// from the config.
class LateContextEncoder {
 public:
  explicit LateContextEncoder(EncoderConfig cfg);

  const EncoderConfig& config() const { return cfg_; }

  SegmentCache NewCache() const;

  // Runs the conv stack over `segment` (frames x dim), continuing from
  // `cache`. Output frame t depends only on input frames <= t, so any
  // segmentation yields the same concatenated output. Throws ShapeError.
  std::pair<SegmentCache, Matrix> EncodeSegment(const SegmentCache& cache,
                                                const Matrix& segment) const;

  // Multi-layer single-head attention with residuals. Every output frame
  // depends on every input frame. Throws ShapeError on empty input.
  LatentSequence Contextualize(const LatentSequence& conv_out) const;

  // Linear projection to vocab logits followed by a row log-softmax.
  EmissionLattice ProjectCtc(const LatentSequence& z, const Vocab& vocab,
                             double frame_duration = 0.04) const;

  FlopsReport Flops(int num_frames, int vocab_size) const;

 private:
  Vector ConvFrame(int layer, const std::deque<Vector>& ring, const Vector& x) const;

  EncoderConfig cfg_;
  std::vector<std::vector<Matrix>> conv_weights_;  // [layer][tap], dim x dim
  std::vector<Vector> conv_bias_;
  struct AttentionWeights {
    Matrix wq, wk, wv, wo;
  };
  std::vector<AttentionWeights> attn_;
};

// Analytic FLOPs without building weights.
FlopsReport EncoderFlops(const EncoderConfig& cfg, int num_frames, int vocab_size);

// Probabilities of a lattice as encoder input features (T x V).
Matrix FeaturesFromLattice(const EmissionLattice& lattice);

}  // namespace streamsu

#endif  // STREAMSU_ENCODER_H_
