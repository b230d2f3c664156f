// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "seal/text/vocab.hpp"

namespace seal::labels {

using text::TokenId;
using text::TokenSeq;

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Builds a score from overlap counts; zero denominators give zero components.
RougeScore make_score(double overlap, double candidate_total, double reference_total);

/// Clipped (multiset) n-gram overlap.
RougeScore rouge_n(std::span<const TokenId> candidate, std::span<const TokenId> reference, std::size_t n);

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);

/// Sentence-level ROUGE-L: one LCS over the full sequences.
RougeScore rouge_l(std::span<const TokenId> candidate, std::span<const TokenId> reference);

/// Summary-level ROUGE-L: per reference sentence, the union of LCS hits
/// against every candidate sentence. A hit consumes one occurrence of the
/// token on both sides, so scores stay in [0, 1].
RougeScore rouge_l_summary(std::span<const TokenSeq> candidate_sentences,
                           std::span<const TokenSeq> reference_sentences);

/// Splits a token sequence after every token for which `is_end` holds.
std::vector<TokenSeq> split_by(std::span<const TokenId> tokens, const std::function<bool(TokenId)>& is_end);

}  // namespace seal::labels
