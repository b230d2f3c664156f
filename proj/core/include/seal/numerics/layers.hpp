// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "seal/numerics/ops.hpp"
#include "seal/numerics/parameters.hpp"
#include "seal/numerics/tape.hpp"

namespace seal::nn {

/// Per-forward settings. Dropout is active only when `training` is set.
struct ForwardContext {
  bool training = false;
  double dropout = 0.0;
  ops::Rng* rng = nullptr;

  double rate() const { return training ? dropout : 0.0; }
};

Var apply_dropout(const Var& x, const ForwardContext& ctx);

/// Sinusoidal position table rows [offset, offset + length).
Tensor sinusoidal_positions(std::size_t length, std::size_t dim, std::size_t offset = 0);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out, std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x) const;

 private:
  Parameter* weight_ = nullptr;
  Parameter* bias_ = nullptr;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& prefix, std::size_t dim, std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x) const;

 private:
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

/// relu(x W1 + b1) W2 + b2
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
              std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x, const ForwardContext& ctx) const;

 private:
  Linear in_;
  Linear out_;
};

class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t heads,
                     std::uint64_t seed);

  /// queries [m, d] attend over memory [n, d]; `mask` is [m, n] or null.
  Var operator()(Tape& tape, const Var& queries, const Var& memory, const Tensor* mask, bool causal,
                 const ForwardContext& ctx) const;

  std::size_t heads() const { return heads_; }

 private:
  Linear q_, k_, v_, o_;
  std::size_t heads_ = 1;
};

/// Pre-norm self-attention block followed by a feed-forward block.
class EncoderLayer {
 public:
  EncoderLayer() = default;
  EncoderLayer(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
               std::size_t heads, std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x, const Tensor* mask, const ForwardContext& ctx) const;

 private:
  LayerNorm norm_attn_, norm_ff_;
  MultiHeadAttention self_attn_;
  FeedForward ff_;
};

/// Pre-norm causal self-attention, cross-attention and feed-forward blocks.
class DecoderLayer {
 public:
  DecoderLayer() = default;
  DecoderLayer(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
               std::size_t heads, std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x, const Var& memory, const Tensor* cross_mask,
                 const ForwardContext& ctx) const;

 private:
  LayerNorm norm_self_, norm_cross_, norm_ff_;
  MultiHeadAttention self_attn_, cross_attn_;
  FeedForward ff_;
};

/// Learned-query attention pooling: [l, d] -> [1, d].
class AttentionPooling {
 public:
  AttentionPooling() = default;
  AttentionPooling(ParameterStore& store, const std::string& prefix, std::size_t dim, std::uint64_t seed);
  Var operator()(Tape& tape, const Var& x) const;

 private:
  Parameter* query_ = nullptr;
  Linear key_;
};

}  // namespace seal::nn
