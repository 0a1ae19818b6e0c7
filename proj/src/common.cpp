// Copyright 2026 The byzgd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "byzgd/common.hpp"

#include <cmath>

namespace byzgd {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr double kCountSlack = 1e-9;

}  // namespace

RandomStream make_stream(std::uint64_t seed, StreamPurpose purpose,
                         std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state ^= static_cast<std::uint64_t>(purpose) * 0xd1b54a32d192ed03ULL;
  key ^= splitmix64(state);
  state ^= a * 0x8cb92ba72f3d8dd7ULL;
  key ^= splitmix64(state);
  state ^= b * 0xabc98388fb8fac03ULL;
  key ^= splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return RandomStream(seq);
}

int fraction_floor(double fraction, int m) {
  return static_cast<int>(std::floor(fraction * m + kCountSlack));
}

int fraction_ceil(double fraction, int m) {
  return static_cast<int>(std::ceil(fraction * m - kCountSlack));
}

}  // namespace byzgd
