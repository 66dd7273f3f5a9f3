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

#ifndef STREAMSU_LOG_MATH_H_
#define STREAMSU_LOG_MATH_H_

#include <cmath>
#include <limits>
#include <span>

namespace streamsu {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)), saturating at kLogZero. Never produces NaN for
// inputs in [-inf, +inf).
inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline double LogSumExp(std::span<const double> xs) {
  double max_v = kLogZero;
  for (double x : xs) max_v = std::max(max_v, x);
  if (max_v == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - max_v);
  return max_v + std::log(sum);
}

// weight * logp with the convention 0 * -inf == 0.
inline double WeightedLog(double weight, double logp) {
  return weight == 0.0 ? 0.0 : weight * logp;
}

}  // namespace streamsu

#endif  // STREAMSU_LOG_MATH_H_
