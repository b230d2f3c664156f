// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "seal/labels/rouge.hpp"
#include "seal/numerics/tensor.hpp"
#include "seal/text/snippets.hpp"

namespace seal::labels {

enum class ScoreType { Precision, Recall, F1 };

std::string to_string(ScoreType type);
ScoreType parse_score_type(const std::string& name);
double pick(const RougeScore& score, ScoreType type);

/// One cell of the labeling grid: sequential x {ROUGE-1, ROUGE-2} x {P, R, F}.
struct LabelConfig {
  bool sequential = false;
  std::size_t ngram = 2;
  ScoreType score_type = ScoreType::F1;
  /// Sequential mode only: emit 1 for greedily selected snippets instead of
  /// the marginal gain.
  bool binary_sequential = false;

  void validate() const;
  friend bool operator==(const LabelConfig&, const LabelConfig&) = default;
};

/// The 12 combinations of the labeling grid (binary_sequential left false).
std::vector<LabelConfig> all_label_configs();

/// Vector mode labels {l_i}, shape [n]. `summary` may end with EOS, which is ignored.
Tensor proxy_labels(std::span<const text::Snippet> snippets, std::span<const TokenId> summary,
                    const LabelConfig& cfg);

/// Splits the target into `num_segments` windows of `segment_length` tokens.
/// Windows past the end of the target are empty.
std::vector<TokenSeq> split_segments(std::span<const TokenId> target, std::size_t segment_length,
                                     std::size_t num_segments);

/// Matrix mode labels {l_ij}, shape [n, num_segments], always non-sequential.
Tensor segment_labels(std::span<const text::Snippet> snippets, std::span<const TokenId> summary,
                      std::size_t segment_length, std::size_t num_segments, const LabelConfig& cfg);

}  // namespace seal::labels
