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

#ifndef BYZGD_COMMON_HPP_
#define BYZGD_COMMON_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace byzgd {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr const char* kVersion = "0.1.0";

/// Model iterate and every gradient-shaped quantity. Internal arithmetic is
/// always 64-bit; 32-bit floats only appear on the wire.
using ParamVector = Vector<double>;
using Index = Eigen::Index;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rejected configuration; the message names the violated invariant.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using RandomStream = std::mt19937_64;

enum class StreamPurpose : std::uint64_t {
  kDataGeneration = 1,
  kByzantineSelection = 2,
  kCompression = 3,
  kAttack = 4,
  kShardCorruption = 5,
};

/// Independent stream for (seed, purpose, a, b). Streams are keyed by worker
/// and iteration so the result never depends on scheduling order.
RandomStream make_stream(std::uint64_t seed, StreamPurpose purpose,
                         std::uint64_t a = 0, std::uint64_t b = 0);

// Fractions of m such as 0.15 * 20 carry representation error in both
// directions; counts are rounded after absorbing it.
int fraction_floor(double fraction, int m);
int fraction_ceil(double fraction, int m);

}  // namespace byzgd

#endif  // BYZGD_COMMON_HPP_
