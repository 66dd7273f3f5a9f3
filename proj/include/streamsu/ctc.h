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

#ifndef STREAMSU_CTC_H_
#define STREAMSU_CTC_H_

#include <optional>
#include <span>
#include <vector>

#include "streamsu/lattice.h"

namespace streamsu {

// Forward variables of one prefix h over frames [0, frames_scored):
//   r_n[t]: log prob that frames 0..t emit h with frame t on a non-blank,
//   r_b[t]: same, ending in blank,
//   psi_acc[t]: log prob that h is completed by some frame <= t.
// psi_acc.back() is the prefix probability of h; it is empty for the
// sos-only prefix.
struct CtcPrefixState {
  std::vector<double> r_n;
  std::vector<double> r_b;
  std::vector<double> psi_acc;
  std::optional<int> last_token;  // nullopt for the sos-only prefix
  int frames_scored = 0;

  bool empty() const { return frames_scored == 0; }
};

struct CtcScore {
  double psi = 0.0;  // log prefix probability
  CtcPrefixState state;
  // Frames of the recursion actually evaluated for this extension.
  int frames_computed = 0;
};

// Hybrid CTC/attention prefix scorer over an emission lattice. Stateless
// apart from the special-token ids, so one instance may be shared freely.
class CtcPrefixScorer {
 public:
  CtcPrefixScorer(int blank_id, int eos_id) : blank_id_(blank_id), eos_id_(eos_id) {}
  explicit CtcPrefixScorer(const Vocab& vocab)
      : CtcPrefixScorer(vocab.blank_id, vocab.eos_id) {}

  int blank_id() const { return blank_id_; }
  int eos_id() const { return eos_id_; }

  // State of the empty prefix: r_b accumulates blanks, r_n = -inf.
  CtcPrefixState Init(const EmissionLattice& lattice) const;

  // Scores h = (g, c) over every frame of `lattice`. For c == eos the score
  // is the total probability of g and the returned state is empty.
  // Throws InvalidToken for blank or an id outside the lattice (eos may lie
  // outside), InvalidState for a state that was not
  // scored on all frames of `lattice`.
  CtcScore Extend(const CtcPrefixState& parent, int c,
                  const EmissionLattice& lattice) const;

  // CTC leap. `cached_child` holds the rows of h = (g, c) from an earlier
  // lattice (a pilot run); rows [0, B) with B = floor(frames_scored * q),
  // including the accumulated prefix probability, are reused and only
  // [B, T) is recomputed against `lattice`, using the parent's rows on
  // `lattice`. Exact whenever the earlier lattice shares
  // its first B frames with `lattice`.
  // Throws InvalidState when B exceeds T or q is outside [0.5, 1].
  CtcScore ExtendLeap(const CtcPrefixState& parent,
                      const CtcPrefixState& cached_child, int c,
                      const EmissionLattice& lattice, double q) const;

  static int LeapBoundary(int cached_frames, double q);

 private:
  void CheckParent(const CtcPrefixState& parent, const EmissionLattice& lattice) const;

  // Fills child rows on [from, T); rows below `from` must already be set.
  void Recurse(const CtcPrefixState& parent, int c, const EmissionLattice& lattice,
               int from, CtcPrefixState& child) const;

  int blank_id_;
  int eos_id_;
};

// Verification oracle: log-sum over all V^T frame paths whose CTC collapse
// starts with `prefix`. Throws TooLarge when V^T exceeds `max_paths`.
double CtcBruteForcePrefix(std::span<const int> prefix,
                           const EmissionLattice& lattice, int blank_id,
                           double max_paths = 1e7);

// Same, restricted to paths collapsing to exactly `sequence`.
double CtcBruteForceExact(std::span<const int> sequence,
                          const EmissionLattice& lattice, int blank_id,
                          double max_paths = 1e7);

}  // namespace streamsu

#endif  // STREAMSU_CTC_H_
