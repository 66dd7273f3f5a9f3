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

#ifndef STREAMSU_METRICS_H_
#define STREAMSU_METRICS_H_

#include <span>
#include <vector>

namespace streamsu {

struct WerBreakdown {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_len = 0;

  int errors() const { return substitutions + deletions + insertions; }
  double wer() const {
    return ref_len == 0 ? 0.0 : static_cast<double>(errors()) / ref_len;
  }
};

// Token-level Levenshtein alignment with unit costs. On ties the traceback
// prefers substitution (or match), then insertion, then deletion.
// Throws InvalidReference when `ref` is empty.
WerBreakdown EditDistance(std::span<const int> ref, std::span<const int> hyp);

// Mean and q-quantile (linear interpolation between order statistics).
double Mean(std::span<const double> xs);
double Quantile(std::vector<double> xs, double q);

// Spearman rank correlation with average ranks for ties.
double SpearmanCorrelation(std::span<const double> a, std::span<const double> b);

}  // namespace streamsu

#endif  // STREAMSU_METRICS_H_
