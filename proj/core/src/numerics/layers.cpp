// SPDX-License-Identifier: Apache-2.0
#include "seal/numerics/layers.hpp"

#include <cmath>

#include "seal/numerics/error.hpp"

namespace seal::nn {

Var apply_dropout(const Var& x, const ForwardContext& ctx) {
  const double rate = ctx.rate();
  if (rate <= 0.0) return x;
  if (!ctx.rng) throw ConfigError("dropout requested without a generator");
  return ops::dropout(x, rate, *ctx.rng);
}

Tensor sinusoidal_positions(std::size_t length, std::size_t dim, std::size_t offset) {
  Tensor out(Shape{length, dim});
  for (std::size_t p = 0; p < length; ++p) {
    const double pos = static_cast<double>(p + offset);
    for (std::size_t i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(dim));
      out.at(p, i) = std::sin(pos * freq);
      if (i + 1 < dim) out.at(p, i + 1) = std::cos(pos * freq);
    }
  }
  return out;
}

Linear::Linear(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
               std::uint64_t seed)
    : weight_(&store.create(prefix + ".weight", Shape{in, out}, Init::GlorotUniform, seed)),
      bias_(&store.create(prefix + ".bias", Shape{out}, Init::Zeros, seed)) {}

Var Linear::operator()(Tape& tape, const Var& x) const {
  return ops::add_bias(ops::matmul(x, tape.param(*weight_)), tape.param(*bias_));
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& prefix, std::size_t dim, std::uint64_t seed)
    : gain_(&store.create(prefix + ".gain", Shape{dim}, Init::Ones, seed)),
      bias_(&store.create(prefix + ".bias", Shape{dim}, Init::Zeros, seed)) {}

Var LayerNorm::operator()(Tape& tape, const Var& x) const {
  return ops::layer_norm(x, tape.param(*gain_), tape.param(*bias_));
}

FeedForward::FeedForward(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
                         std::uint64_t seed)
    : in_(store, prefix + ".in", dim, hidden, seed), out_(store, prefix + ".out", hidden, dim, seed) {}

Var FeedForward::operator()(Tape& tape, const Var& x, const ForwardContext& ctx) const {
  return out_(tape, apply_dropout(ops::relu(in_(tape, x)), ctx));
}

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                       std::size_t heads, std::uint64_t seed)
    : q_(store, prefix + ".query", dim, dim, seed),
      k_(store, prefix + ".key", dim, dim, seed),
      v_(store, prefix + ".value", dim, dim, seed),
      o_(store, prefix + ".output", dim, dim, seed),
      heads_(heads) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention heads (" + std::to_string(heads) + ") must divide d_model (" +
                      std::to_string(dim) + ")");
  }
}

Var MultiHeadAttention::operator()(Tape& tape, const Var& queries, const Var& memory, const Tensor* mask,
                                   bool causal, const ForwardContext& ctx) const {
  ops::AttentionOptions opt;
  opt.heads = heads_;
  opt.mask = mask;
  opt.causal = causal;
  opt.dropout = ctx.rate();
  opt.rng = ctx.rng;
  const Var q = q_(tape, queries);
  const Var k = k_(tape, memory);
  const Var v = v_(tape, memory);
  return o_(tape, ops::attention(q, k, v, opt));
}

EncoderLayer::EncoderLayer(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
                           std::size_t heads, std::uint64_t seed)
    : norm_attn_(store, prefix + ".norm_attn", dim, seed),
      norm_ff_(store, prefix + ".norm_ff", dim, seed),
      self_attn_(store, prefix + ".self_attn", dim, heads, seed),
      ff_(store, prefix + ".ff", dim, hidden, seed) {}

Var EncoderLayer::operator()(Tape& tape, const Var& x, const Tensor* mask, const ForwardContext& ctx) const {
  const Var h = norm_attn_(tape, x);
  Var y = ops::add(x, apply_dropout(self_attn_(tape, h, h, mask, false, ctx), ctx));
  return ops::add(y, apply_dropout(ff_(tape, norm_ff_(tape, y), ctx), ctx));
}

DecoderLayer::DecoderLayer(ParameterStore& store, const std::string& prefix, std::size_t dim, std::size_t hidden,
                           std::size_t heads, std::uint64_t seed)
    : norm_self_(store, prefix + ".norm_self", dim, seed),
      norm_cross_(store, prefix + ".norm_cross", dim, seed),
      norm_ff_(store, prefix + ".norm_ff", dim, seed),
      self_attn_(store, prefix + ".self_attn", dim, heads, seed),
      cross_attn_(store, prefix + ".cross_attn", dim, heads, seed),
      ff_(store, prefix + ".ff", dim, hidden, seed) {}

Var DecoderLayer::operator()(Tape& tape, const Var& x, const Var& memory, const Tensor* cross_mask,
                             const ForwardContext& ctx) const {
  const Var h = norm_self_(tape, x);
  Var y = ops::add(x, apply_dropout(self_attn_(tape, h, h, nullptr, true, ctx), ctx));
  y = ops::add(y, apply_dropout(cross_attn_(tape, norm_cross_(tape, y), memory, cross_mask, false, ctx), ctx));
  return ops::add(y, apply_dropout(ff_(tape, norm_ff_(tape, y), ctx), ctx));
}

AttentionPooling::AttentionPooling(ParameterStore& store, const std::string& prefix, std::size_t dim,
                                   std::uint64_t seed)
    : query_(&store.create(prefix + ".query", Shape{dim, 1}, Init::GlorotUniform, seed)),
      key_(store, prefix + ".key", dim, dim, seed) {}

Var AttentionPooling::operator()(Tape& tape, const Var& x) const {
  const std::size_t len = x.value().rows();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(x.value().cols()));
  // [l, 1] scores -> [1, l] weights -> [1, d]
  const Var logits = ops::transpose(ops::scale(ops::matmul(key_(tape, x), tape.param(*query_)), inv_sqrt));
  const Var weights = ops::masked_softmax(logits, Tensor(Shape{1, len}, 1.0));
  return ops::matmul(weights, x);
}

}  // namespace seal::nn
