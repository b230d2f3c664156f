// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "seal/numerics/tape.hpp"
#include "seal/text/vocab.hpp"

namespace seal::training {

using text::TokenId;
using text::TokenSeq;

/// Mean token cross-entropy over positions where pad_mask is 1. Logits are
/// [T, V]; an all-pad target throws InputError.
Var abstractive_loss(const Var& logits, std::span<const TokenId> targets, std::span<const double> pad_mask);
/// Same, with every non-<pad> target position counted.
Var abstractive_loss(const Var& logits, std::span<const TokenId> targets);

/// sum_i (s_i - l_i)^2 / n over scores [n].
Var extractive_loss_ea(const Var& scores, const Tensor& labels);

/// sum_ij (s_ij - l_ij)^2 / (n m). `scores` holds one [n] vector per segment,
/// labels are [n, m] with m = scores.size().
Var extractive_loss_seal(std::span<const Var> scores, const Tensor& labels);

}  // namespace seal::training
