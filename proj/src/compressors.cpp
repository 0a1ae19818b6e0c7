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

#include "byzgd/compressors.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace byzgd {
namespace {

int ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0 : static_cast<int>(std::bit_width(v - 1));
}

std::size_t sign_bytes(Index d) { return static_cast<std::size_t>((d + 7) / 8); }

std::vector<std::uint8_t> pack_signs(const ParamVector& x) {
  std::vector<std::uint8_t> bits(sign_bytes(x.size()), 0);
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) < 0) bits[static_cast<std::size_t>(i / 8)] |= std::uint8_t(1u << (i % 8));
  }
  return bits;
}

double sign_at(const std::vector<std::uint8_t>& bits, Index i) {
  return (bits[static_cast<std::size_t>(i / 8)] >> (i % 8)) & 1u ? -1.0 : 1.0;
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double uniform01(RandomStream& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class ByteWriter {
 public:
  void f32(double v) {
    const float f = static_cast<float>(v);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    u32(u);
  }
  void u32(std::uint32_t u) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void bytes(const std::vector<std::uint8_t>& b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t u = 0;
    for (int i = 0; i < 4; ++i) u |= std::uint32_t(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return u;
  }
  double f32() {
    const std::uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, sizeof f);
    return static_cast<double>(f);
  }
  std::vector<std::uint8_t> bytes(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> b(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return b;
  }
  void expect_end() const {
    if (pos_ != in_.size()) throw DecodeError("trailing bytes in payload");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw DecodeError("payload truncated");
  }
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> pack_levels(const std::vector<std::uint32_t>& levels, int width) {
  std::vector<std::uint8_t> out((levels.size() * static_cast<std::size_t>(width) + 7) / 8, 0);
  std::size_t bit = 0;
  for (std::uint32_t level : levels) {
    for (int b = 0; b < width; ++b, ++bit) {
      if ((level >> b) & 1u) out[bit / 8] |= std::uint8_t(1u << (bit % 8));
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_levels(const std::vector<std::uint8_t>& packed, Index d, int width) {
  std::vector<std::uint32_t> levels(static_cast<std::size_t>(d), 0);
  std::size_t bit = 0;
  for (auto& level : levels) {
    for (int b = 0; b < width; ++b, ++bit) {
      if ((packed[bit / 8] >> (bit % 8)) & 1u) level |= 1u << b;
    }
  }
  return levels;
}

template <typename T>
const T& payload_as(const CompressedMsg& msg) {
  const T* p = std::get_if<T>(&msg.payload);
  if (p == nullptr) throw DecodeError("payload does not match compressor kind");
  return *p;
}

}  // namespace

std::string_view to_string(CompressorKind kind) {
  switch (kind) {
    case CompressorKind::kNone: return "none";
    case CompressorKind::kTopK: return "topk";
    case CompressorKind::kQsgd: return "qsgd";
    case CompressorKind::kL1Qsgd: return "l1qsgd";
    case CompressorKind::kSign: return "sign";
  }
  return "unknown";
}

CompressorKind compressor_kind_from_string(std::string_view name) {
  for (auto kind : {CompressorKind::kNone, CompressorKind::kTopK, CompressorKind::kQsgd,
                    CompressorKind::kL1Qsgd, CompressorKind::kSign}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidSpec("unknown compressor kind '" + std::string(name) + "'");
}

void CompressorSpec::validate(Index d) const {
  if (d <= 0) throw InvalidInput("compressor dimension must be positive");
  if (kind == CompressorKind::kTopK && (k < 1 || k > d)) {
    throw InvalidInput("TopK requires 1 <= k <= d (k=" + std::to_string(k) +
                       ", d=" + std::to_string(d) + ")");
  }
  if (kind == CompressorKind::kQsgd && s < 1) {
    throw InvalidInput("Qsgd requires s >= 1");
  }
}

int qsgd_level_bits(int s) { return ceil_log2(static_cast<std::uint64_t>(s) + 1); }

CompressedMsg compress(const CompressorSpec& spec, const ParamVector& x, RandomStream* rng) {
  const Index d = x.size();
  spec.validate(d);
  CompressedMsg msg;
  msg.kind = spec.kind;
  msg.dim = d;
  msg.levels = spec.s;
  msg.bits = message_bits(spec, d, false);

  switch (spec.kind) {
    case CompressorKind::kNone:
      msg.payload = DensePayload{x};
      break;
    case CompressorKind::kTopK: {
      SparsePayload sparse;
      for (Index i : top_k_indices(x, spec.k)) {
        sparse.indices.push_back(static_cast<std::uint32_t>(i));
        sparse.values.push_back(x(i));
      }
      msg.payload = std::move(sparse);
      break;
    }
    case CompressorKind::kSign:
      msg.payload = SignScalePayload{1.0, pack_signs(x)};
      break;
    case CompressorKind::kL1Qsgd:
      msg.payload = SignScalePayload{x.lpNorm<1>() / static_cast<double>(d), pack_signs(x)};
      break;
    case CompressorKind::kQsgd: {
      if (rng == nullptr) throw InvalidInput("Qsgd compression needs a random stream");
      QsgdPayload q;
      q.norm = x.norm();
      q.sign_bits = pack_signs(x);
      q.levels.assign(static_cast<std::size_t>(d), 0);
      if (q.norm > 0) {
        const auto s = static_cast<double>(spec.s);
        for (Index i = 0; i < d; ++i) {
          const double r = std::abs(x(i)) / q.norm * s;
          auto level = static_cast<std::uint32_t>(std::floor(r));
          // Round up with probability equal to the fractional part.
          if (level < static_cast<std::uint32_t>(spec.s) && uniform01(*rng) < r - level) ++level;
          q.levels[static_cast<std::size_t>(i)] = level;
        }
      }
      msg.payload = std::move(q);
      break;
    }
  }
  return msg;
}

void attach_norm(CompressedMsg& msg, double norm) {
  if (!msg.reported_norm) msg.bits += 32;
  msg.reported_norm = norm;
}

ParamVector decompress(const CompressedMsg& msg) {
  const Index d = msg.dim;
  ParamVector out = ParamVector::Zero(d);
  switch (msg.kind) {
    case CompressorKind::kNone: {
      const auto& dense = payload_as<DensePayload>(msg);
      if (dense.values.size() != d) throw DecodeError("dense payload has wrong length");
      out = dense.values;
      break;
    }
    case CompressorKind::kTopK: {
      const auto& sparse = payload_as<SparsePayload>(msg);
      if (sparse.indices.size() != sparse.values.size()) throw DecodeError("sparse payload arity mismatch");
      for (std::size_t j = 0; j < sparse.indices.size(); ++j) {
        const auto i = static_cast<Index>(sparse.indices[j]);
        if (i >= d) throw DecodeError("sparse index out of range");
        out(i) = sparse.values[j];
      }
      break;
    }
    case CompressorKind::kSign:
    case CompressorKind::kL1Qsgd: {
      const auto& ss = payload_as<SignScalePayload>(msg);
      if (ss.sign_bits.size() != sign_bytes(d)) throw DecodeError("sign payload has wrong length");
      const double scale = msg.kind == CompressorKind::kSign ? 1.0 : ss.scale;
      for (Index i = 0; i < d; ++i) out(i) = scale * sign_at(ss.sign_bits, i);
      break;
    }
    case CompressorKind::kQsgd: {
      const auto& q = payload_as<QsgdPayload>(msg);
      if (q.sign_bits.size() != sign_bytes(d) || q.levels.size() != static_cast<std::size_t>(d)) {
        throw DecodeError("qsgd payload has wrong length");
      }
      if (msg.levels < 1) throw DecodeError("qsgd message without level count");
      const auto s = static_cast<double>(msg.levels);
      for (Index i = 0; i < d; ++i) {
        const auto level = q.levels[static_cast<std::size_t>(i)];
        if (level > static_cast<std::uint32_t>(msg.levels)) throw DecodeError("qsgd level exceeds s");
        out(i) = q.norm * sign_at(q.sign_bits, i) * (level / s);
      }
      break;
    }
  }
  return out;
}

ParamVector decompress(const CompressorSpec& spec, const CompressedMsg& msg) {
  if (msg.kind != spec.kind) throw DecodeError("message kind does not match compressor");
  if (spec.kind == CompressorKind::kQsgd && msg.levels != spec.s) {
    throw DecodeError("message level count does not match compressor");
  }
  if (spec.kind == CompressorKind::kTopK) {
    const auto& sparse = payload_as<SparsePayload>(msg);
    if (sparse.indices.size() != static_cast<std::size_t>(spec.k)) {
      throw DecodeError("sparse payload does not carry k entries");
    }
  }
  return decompress(msg);
}

double measured_delta(const CompressorSpec& spec, const ParamVector& x, RandomStream* rng) {
  if (x.squaredNorm() == 0) return 1.0;
  const ParamVector q = decompress(compress(spec, x, rng));
  return 1.0 - relative_distortion(q, x);
}

std::optional<double> stated_delta(const CompressorSpec& spec, const ParamVector& x) {
  const auto d = static_cast<double>(x.size());
  switch (spec.kind) {
    case CompressorKind::kL1Qsgd: {
      const double sq = x.squaredNorm();
      if (sq == 0) return 1.0;
      const double l1 = x.lpNorm<1>();
      return l1 * l1 / (d * sq);
    }
    case CompressorKind::kSign:
      return std::nullopt;
    default:
      return nominal_delta(spec, x.size());
  }
}

std::optional<double> nominal_delta(const CompressorSpec& spec, Index d) {
  const auto dd = static_cast<double>(d);
  switch (spec.kind) {
    case CompressorKind::kNone: return 1.0;
    case CompressorKind::kTopK: return spec.k / dd;
    case CompressorKind::kQsgd: {
      const double s = spec.s;
      return 1.0 - std::min(dd / (s * s), std::sqrt(dd) / s);
    }
    default: return std::nullopt;
  }
}

std::int64_t message_bits(const CompressorSpec& spec, Index d, bool with_norm) {
  std::int64_t bits = 0;
  switch (spec.kind) {
    case CompressorKind::kNone: bits = 32 * d; break;
    case CompressorKind::kSign: bits = d; break;
    case CompressorKind::kL1Qsgd: bits = d + 32; break;
    case CompressorKind::kQsgd: bits = 32 + d + d * qsgd_level_bits(spec.s); break;
    case CompressorKind::kTopK:
      bits = std::int64_t{spec.k} * (ceil_log2(static_cast<std::uint64_t>(d)) + 32);
      break;
  }
  return with_norm ? bits + 32 : bits;
}

std::int64_t wire_padding_bits(const CompressorSpec& spec, Index d) {
  const std::int64_t sign_pad = 8 * static_cast<std::int64_t>(sign_bytes(d)) - d;
  switch (spec.kind) {
    case CompressorKind::kNone: return 0;
    case CompressorKind::kSign:
    case CompressorKind::kL1Qsgd: return sign_pad;
    case CompressorKind::kQsgd: {
      const std::int64_t level_bits = d * qsgd_level_bits(spec.s);
      return sign_pad + (8 * ((level_bits + 7) / 8) - level_bits);
    }
    case CompressorKind::kTopK:
      return std::int64_t{spec.k} * (32 - ceil_log2(static_cast<std::uint64_t>(d)));
  }
  return 0;
}

std::vector<std::uint8_t> encode_wire(const CompressedMsg& msg) {
  ByteWriter w;
  switch (msg.kind) {
    case CompressorKind::kNone: {
      const auto& dense = payload_as<DensePayload>(msg);
      for (Index i = 0; i < dense.values.size(); ++i) w.f32(dense.values(i));
      break;
    }
    case CompressorKind::kTopK: {
      const auto& sparse = payload_as<SparsePayload>(msg);
      for (std::size_t j = 0; j < sparse.indices.size(); ++j) {
        w.u32(sparse.indices[j]);
        w.f32(sparse.values[j]);
      }
      break;
    }
    case CompressorKind::kSign:
      w.bytes(payload_as<SignScalePayload>(msg).sign_bits);
      break;
    case CompressorKind::kL1Qsgd: {
      const auto& ss = payload_as<SignScalePayload>(msg);
      w.f32(ss.scale);
      w.bytes(ss.sign_bits);
      break;
    }
    case CompressorKind::kQsgd: {
      const auto& q = payload_as<QsgdPayload>(msg);
      w.f32(q.norm);
      w.bytes(q.sign_bits);
      w.bytes(pack_levels(q.levels, qsgd_level_bits(msg.levels)));
      break;
    }
  }
  if (msg.reported_norm) w.f32(*msg.reported_norm);
  return w.take();
}

CompressedMsg decode_wire(const CompressorSpec& spec, Index d, bool with_norm,
                          const std::vector<std::uint8_t>& bytes) {
  spec.validate(d);
  ByteReader r(bytes);
  CompressedMsg msg;
  msg.kind = spec.kind;
  msg.dim = d;
  msg.levels = spec.s;
  msg.bits = message_bits(spec, d, false);
  switch (spec.kind) {
    case CompressorKind::kNone: {
      ParamVector v(d);
      for (Index i = 0; i < d; ++i) v(i) = r.f32();
      msg.payload = DensePayload{std::move(v)};
      break;
    }
    case CompressorKind::kTopK: {
      SparsePayload sparse;
      for (int j = 0; j < spec.k; ++j) {
        const std::uint32_t index = r.u32();
        if (index >= static_cast<std::uint64_t>(d)) throw DecodeError("sparse index out of range");
        if (!sparse.indices.empty() && index <= sparse.indices.back()) {
          throw DecodeError("sparse indices must be strictly increasing");
        }
        sparse.indices.push_back(index);
        sparse.values.push_back(r.f32());
      }
      msg.payload = std::move(sparse);
      break;
    }
    case CompressorKind::kSign:
      msg.payload = SignScalePayload{1.0, r.bytes(sign_bytes(d))};
      break;
    case CompressorKind::kL1Qsgd: {
      const double scale = r.f32();
      msg.payload = SignScalePayload{scale, r.bytes(sign_bytes(d))};
      break;
    }
    case CompressorKind::kQsgd: {
      QsgdPayload q;
      q.norm = r.f32();
      q.sign_bits = r.bytes(sign_bytes(d));
      const int width = qsgd_level_bits(spec.s);
      const auto level_bytes = static_cast<std::size_t>((d * width + 7) / 8);
      q.levels = unpack_levels(r.bytes(level_bytes), d, width);
      for (auto level : q.levels) {
        if (level > static_cast<std::uint32_t>(spec.s)) throw DecodeError("qsgd level exceeds s");
      }
      msg.payload = std::move(q);
      break;
    }
  }
  if (with_norm) attach_norm(msg, r.f32());
  r.expect_end();
  return msg;
}

}  // namespace byzgd
