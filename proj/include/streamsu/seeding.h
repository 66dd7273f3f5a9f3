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

#ifndef STREAMSU_SEEDING_H_
#define STREAMSU_SEEDING_H_

#include <cstdint>
#include <initializer_list>
#include <span>

namespace streamsu {

// splitmix64 finalizer.
inline uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of seeds and ids into a new seed.
inline uint64_t DeriveSeed(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x6a09e667f3bcc909ULL;
  for (uint64_t p : parts) h = Mix64(h ^ Mix64(p));
  return h;
}

inline uint64_t DeriveSeed(uint64_t base, std::span<const int> ids) {
  uint64_t h = Mix64(base);
  for (int id : ids) h = Mix64(h ^ static_cast<uint64_t>(id + 0x100));
  return Mix64(h ^ ids.size());
}

}  // namespace streamsu

#endif  // STREAMSU_SEEDING_H_
