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

// δ-approximate gradient compressors with exact bit accounting.
//
// A compressor maps x to Q(x) with ||Q(x) - x||^2 <= (1 - δ)||x||^2. Each
// encoding keeps its compressed representation in 64-bit precision in
// process; encode_wire() produces the little-endian wire form whose size is
// message_bits() plus byte-alignment padding.
//
// Wire layouts, in order:
//   None    d x float32
//   Sign    ceil(d/8) sign bytes
//   L1Qsgd  float32 scale, ceil(d/8) sign bytes
//   Qsgd    float32 norm, ceil(d/8) sign bytes, d levels of ceil(log2(s+1))
//           bits packed LSB-first
//   TopK    k x (uint32 index, float32 value)
// followed by a float32 norm when one is attached. Sign bits are LSB-first
// and a set bit means negative; sign(0) is +1.

#ifndef BYZGD_COMPRESSORS_HPP_
#define BYZGD_COMPRESSORS_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "byzgd/common.hpp"

namespace byzgd {

enum class CompressorKind { kNone, kTopK, kQsgd, kL1Qsgd, kSign };

std::string_view to_string(CompressorKind kind);
CompressorKind compressor_kind_from_string(std::string_view name);

struct CompressorSpec {
  CompressorKind kind = CompressorKind::kNone;
  int k = 0;  // TopK only
  int s = 0;  // Qsgd only

  static CompressorSpec none() { return {}; }
  static CompressorSpec top_k(int k) { return {CompressorKind::kTopK, k, 0}; }
  static CompressorSpec qsgd(int s) { return {CompressorKind::kQsgd, 0, s}; }
  static CompressorSpec l1_qsgd() { return {CompressorKind::kL1Qsgd, 0, 0}; }
  static CompressorSpec sign() { return {CompressorKind::kSign, 0, 0}; }

  /// Throws InvalidInput unless the spec is usable at dimension d.
  void validate(Index d) const;
  bool is_randomized() const { return kind == CompressorKind::kQsgd; }

  friend bool operator==(const CompressorSpec&, const CompressorSpec&) = default;
};

struct DensePayload {
  ParamVector values;
};

struct SparsePayload {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
};

/// Sign and L1Qsgd. For Sign the scale slot is unused and fixed at 1.
struct SignScalePayload {
  double scale = 1.0;
  std::vector<std::uint8_t> sign_bits;
};

struct QsgdPayload {
  double norm = 0.0;
  std::vector<std::uint8_t> sign_bits;
  std::vector<std::uint32_t> levels;  // each in [0, s]
};

using Payload =
    std::variant<DensePayload, SparsePayload, SignScalePayload, QsgdPayload>;

struct CompressedMsg {
  CompressorKind kind = CompressorKind::kNone;
  Index dim = 0;
  int levels = 0;  // s for Qsgd, used by decode and bit accounting
  Payload payload;
  std::optional<double> reported_norm;
  std::int64_t bits = 0;
};

CompressedMsg compress(const CompressorSpec& spec, const ParamVector& x,
                       RandomStream* rng = nullptr);

/// Adds the Option I norm side channel (+32 bits).
void attach_norm(CompressedMsg& msg, double norm);

ParamVector decompress(const CompressorSpec& spec, const CompressedMsg& msg);

/// Decodes using only what the message itself carries.
ParamVector decompress(const CompressedMsg& msg);

/// 1 - ||Q(x) - x||^2 / ||x||^2, and 1 for x = 0. Within [0, 1] for the
/// δ-approximate kinds; a single Qsgd draw or a Sign message can go negative.
double measured_delta(const CompressorSpec& spec, const ParamVector& x,
                      RandomStream* rng = nullptr);

/// The guaranteed δ for input x: k/d, ||x||_1^2 / (d ||x||^2),
/// 1 - min(d/s^2, sqrt(d)/s) in expectation for Qsgd, 1 for None.
/// Sign has no guarantee and yields nullopt.
std::optional<double> stated_delta(const CompressorSpec& spec,
                                   const ParamVector& x);

/// Input-independent δ where one exists (TopK, Qsgd, None).
std::optional<double> nominal_delta(const CompressorSpec& spec, Index d);

std::int64_t message_bits(const CompressorSpec& spec, Index d, bool with_norm);

/// Bits lost to byte alignment in the wire encoding.
std::int64_t wire_padding_bits(const CompressorSpec& spec, Index d);

std::vector<std::uint8_t> encode_wire(const CompressedMsg& msg);
CompressedMsg decode_wire(const CompressorSpec& spec, Index d, bool with_norm,
                          const std::vector<std::uint8_t>& bytes);

int qsgd_level_bits(int s);

// ---------------------------------------------------------------------------
// Expression-level helpers.

/// sign with sign(0) = +1.
template <typename Derived>
auto sign_of(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr(
      [](Scalar v) { return v < Scalar(0) ? Scalar(-1) : Scalar(1); });
}

/// Indices of the k largest |x_i|, ties to the lower index, returned in
/// ascending index order.
template <typename Derived>
std::vector<Index> top_k_indices(const Eigen::MatrixBase<Derived>& x,
                                 Index k) {
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  auto by_magnitude = [&x](Index a, Index b) {
    const auto ma = std::abs(x(a));
    const auto mb = std::abs(x(b));
    return ma != mb ? ma > mb : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    by_magnitude);
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

/// Relative squared distortion ||q - x||^2 / ||x||^2 (0 for x = 0).
template <typename DerivedQ, typename DerivedX>
typename DerivedX::Scalar relative_distortion(
    const Eigen::MatrixBase<DerivedQ>& q, const Eigen::MatrixBase<DerivedX>& x) {
  const auto denom = x.squaredNorm();
  if (denom == 0) return 0;
  return (q - x).squaredNorm() / denom;
}

}  // namespace byzgd

#endif  // BYZGD_COMPRESSORS_HPP_
