// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "seal/numerics/tape.hpp"

namespace seal::ops {

using Rng = std::mt19937_64;

// Elementwise. Shapes must match exactly.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var relu(const Var& a);

/// x[..., n] + bias[n], broadcast over leading dimensions.
Var add_bias(const Var& x, const Var& bias);

/// [p, q] x [q, r], or batched [B, p, q] x [B, q, r] where either batch may be 1.
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, Shape shape);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& a, std::size_t begin, std::size_t end);
Var slice_cols(const Var& a, std::size_t begin, std::size_t end);
/// Appends zero rows up to `rows`.
Var pad_rows(const Var& a, std::size_t rows);

/// Selects rows of a 2-D table. The gradient scatters back into the table.
Var gather_rows(const Var& table, std::span<const std::int64_t> rows);
/// Token embedding lookup; ids outside [0, vocab) are an InputError.
Var embedding_lookup(const Var& table, std::span<const std::int32_t> ids);

/// Softmax over the last dimension restricted to positions where mask != 0.
/// Masked positions are exactly zero. A row with no unmasked position throws.
Var masked_softmax(const Var& logits, const Tensor& mask);

/// Normalizes each row over the last dimension, then applies gain and bias.
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-6);

Var sum(const Var& a);
Var mean(const Var& a);
/// Mean squared error over all elements.
Var mse(const Var& prediction, const Var& target);

/// Mean token cross-entropy of logits [T, V] over positions with weight != 0.
Var cross_entropy(const Var& logits, std::span<const std::int32_t> targets, std::span<const double> weights);

/// Inverted dropout. Identity when rate == 0.
Var dropout(const Var& a, double rate, Rng& rng);

struct AttentionOptions {
  std::size_t heads = 1;
  /// [m, n] of {0,1}; nullptr means every key is visible.
  const Tensor* mask = nullptr;
  bool causal = false;
  double dropout = 0.0;
  Rng* rng = nullptr;
};

/// Multi-head scaled dot-product attention over already projected
/// queries [m, d], keys [n, d] and values [n, d]; heads split d evenly.
/// Returns the concatenated head outputs [m, d].
Var attention(const Var& q, const Var& k, const Var& v, const AttentionOptions& options);

}  // namespace seal::ops
