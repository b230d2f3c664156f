// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "seal/models/summarizer.hpp"
#include "seal/text/vocab.hpp"

namespace seal::training {

using text::TokenId;
using text::TokenSeq;

/// Corpus means of per-example F1 scores, each in [0, 1].
struct EvalReport {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;      // sentence-level
  double rouge_lsum = 0.0;   // summary-level
  std::size_t count = 0;

  /// "R1 .. R2 .. RL .. RLsum .." with values x100.
  std::string to_text() const;
  std::string to_json() const;
};

/// Scores predictions against references (EOS and padding ignored).
/// Summary-level ROUGE-L splits both sides at sentence-final tokens.
EvalReport score_predictions(std::span<const TokenSeq> predictions, std::span<const TokenSeq> references,
                             const text::Vocab& vocab);

/// Greedy-decodes every example and scores it against its target.
EvalReport evaluate(const models::Summarizer& model, std::span<const text::SnippetizedExample> dataset,
                    const text::Vocab& vocab, std::vector<TokenSeq>* predictions = nullptr);

}  // namespace seal::training
