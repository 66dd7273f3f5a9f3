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

#include "streamsu/errors.h"
#include "streamsu/log_math.h"

namespace streamsu {

CtcPrefixState CtcPrefixScorer::Init(const EmissionLattice& lattice) const {
  const int num_frames = lattice.num_frames();
  CtcPrefixState state;
  state.r_n.assign(num_frames, kLogZero);
  state.r_b.resize(num_frames);
  double acc = 0.0;
  for (int t = 0; t < num_frames; ++t) {
    acc += lattice.at(t, blank_id_);
    state.r_b[t] = acc;
  }
  state.frames_scored = num_frames;
  return state;
}

void CtcPrefixScorer::CheckParent(const CtcPrefixState& parent,
                                  const EmissionLattice& lattice) const {
  if (parent.frames_scored != lattice.num_frames() ||
      parent.r_n.size() != static_cast<size_t>(parent.frames_scored) ||
      parent.r_b.size() != static_cast<size_t>(parent.frames_scored)) {
    throw InvalidState("ctc: parent state does not cover the lattice");
  }
}

void CtcPrefixScorer::Recurse(const CtcPrefixState& parent, int c,
                              const EmissionLattice& lattice, int from,
                              CtcPrefixState& child) const {
  const int num_frames = lattice.num_frames();
  const bool repeat = parent.last_token == c;
  if (from == 0) {
    child.r_n[0] = parent.last_token ? kLogZero : lattice.at(0, c);
    child.r_b[0] = kLogZero;
    child.psi_acc[0] = child.r_n[0];
    from = 1;
  }
  for (int t = from; t < num_frames; ++t) {
    const double phi = repeat ? parent.r_b[t - 1]
                              : LogAdd(parent.r_b[t - 1], parent.r_n[t - 1]);
    child.r_n[t] = LogAdd(child.r_n[t - 1], phi) + lattice.at(t, c);
    child.psi_acc[t] = LogAdd(child.psi_acc[t - 1], phi + lattice.at(t, c));
    child.r_b[t] = LogAdd(child.r_b[t - 1], child.r_n[t - 1]) + lattice.at(t, blank_id_);
  }
}

CtcScore CtcPrefixScorer::Extend(const CtcPrefixState& parent, int c,
                                 const EmissionLattice& lattice) const {
  if (c == blank_id_) throw InvalidToken("ctc: cannot extend with blank");
  CheckParent(parent, lattice);
  const int num_frames = lattice.num_frames();
  CtcScore out;
  if (c == eos_id_) {
    out.psi = LogAdd(parent.r_n[num_frames - 1], parent.r_b[num_frames - 1]);
    return out;
  }
  if (c < 0 || c >= lattice.vocab_size()) throw InvalidToken("ctc: token out of range");
  out.state.r_n.resize(num_frames);
  out.state.r_b.resize(num_frames);
  out.state.psi_acc.resize(num_frames);
  out.state.last_token = c;
  out.state.frames_scored = num_frames;
  Recurse(parent, c, lattice, 0, out.state);
  out.psi = out.state.psi_acc.back();
  out.frames_computed = num_frames;
  return out;
}

int CtcPrefixScorer::LeapBoundary(int cached_frames, double q) {
  // The epsilon keeps products such as 10 * 0.7 from flooring to 6.
  return static_cast<int>(std::floor(cached_frames * q + 1e-9));
}

CtcScore CtcPrefixScorer::ExtendLeap(const CtcPrefixState& parent,
                                     const CtcPrefixState& cached_child, int c,
                                     const EmissionLattice& lattice,
                                     double q) const {
  if (c == blank_id_) throw InvalidToken("ctc: cannot extend with blank");
  if (!(q >= 0.5 && q <= 1.0)) throw InvalidState("ctc leap: q outside [0.5, 1]");
  if (c == eos_id_) return Extend(parent, c, lattice);
  CheckParent(parent, lattice);
  if (cached_child.last_token != c) {
    throw InvalidState("ctc leap: cached rows belong to a different token");
  }
  const int num_frames = lattice.num_frames();
  const int boundary = LeapBoundary(cached_child.frames_scored, q);
  if (boundary > num_frames || cached_child.frames_scored > num_frames) {
    throw InvalidState("ctc leap: boundary beyond lattice end");
  }
  if (cached_child.psi_acc.size() < static_cast<size_t>(boundary)) {
    throw InvalidState("ctc leap: cached rows are incomplete");
  }
  CtcScore out;
  out.state.r_n.resize(num_frames);
  out.state.r_b.resize(num_frames);
  out.state.psi_acc.resize(num_frames);
  std::copy_n(cached_child.r_n.begin(), boundary, out.state.r_n.begin());
  std::copy_n(cached_child.r_b.begin(), boundary, out.state.r_b.begin());
  std::copy_n(cached_child.psi_acc.begin(), boundary, out.state.psi_acc.begin());
  out.state.last_token = c;
  out.state.frames_scored = num_frames;
  Recurse(parent, c, lattice, boundary, out.state);
  out.psi = out.state.psi_acc.back();
  out.frames_computed = num_frames - boundary;
  return out;
}

namespace {

template <typename Accept>
double BruteForce(const EmissionLattice& lattice, int blank_id, double max_paths,
                  Accept accept) {
  const int num_frames = lattice.num_frames();
  const int vsize = lattice.vocab_size();
  if (std::pow(static_cast<double>(vsize), num_frames) > max_paths) {
    throw TooLarge("ctc brute force: V^T exceeds the enumeration guard");
  }
  std::vector<int> path(num_frames, 0);
  double total = kLogZero;
  std::vector<int> collapsed;
  while (true) {
    collapsed.clear();
    int prev = -1;
    double logp = 0.0;
    for (int t = 0; t < num_frames; ++t) {
      const int sym = path[t];
      logp += lattice.at(t, sym);
      if (sym != prev && sym != blank_id) collapsed.push_back(sym);
      prev = sym;
    }
    if (accept(collapsed)) total = LogAdd(total, logp);
    int t = num_frames - 1;
    while (t >= 0 && ++path[t] == vsize) path[t--] = 0;
    if (t < 0) break;
  }
  return total;
}

}  // namespace

double CtcBruteForcePrefix(std::span<const int> prefix,
                           const EmissionLattice& lattice, int blank_id,
                           double max_paths) {
  return BruteForce(lattice, blank_id, max_paths, [&](const std::vector<int>& seq) {
    return seq.size() >= prefix.size() &&
           std::equal(prefix.begin(), prefix.end(), seq.begin());
  });
}

double CtcBruteForceExact(std::span<const int> sequence,
                          const EmissionLattice& lattice, int blank_id,
                          double max_paths) {
  return BruteForce(lattice, blank_id, max_paths, [&](const std::vector<int>& seq) {
    return std::equal(sequence.begin(), sequence.end(), seq.begin(), seq.end());
  });
}

}  // namespace streamsu
