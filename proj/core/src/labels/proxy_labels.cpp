// SPDX-License-Identifier: Apache-2.0
#include "seal/labels/proxy_labels.hpp"

#include <algorithm>

#include "seal/numerics/error.hpp"

namespace seal::labels {
namespace {

TokenSeq strip_special(std::span<const TokenId> seq) {
  TokenSeq out;
  for (TokenId t : seq) {
    if (t == text::kPad || t == text::kBos || t == text::kEos) continue;
    out.push_back(t);
  }
  return out;
}

TokenSeq concat_selected(std::span<const text::Snippet> snippets, const std::vector<char>& chosen) {
  TokenSeq out;
  for (std::size_t i = 0; i < snippets.size(); ++i) {
    if (chosen[i]) out.insert(out.end(), snippets[i].tokens.begin(), snippets[i].tokens.end());
  }
  return out;
}

}  // namespace

std::string to_string(ScoreType type) {
  switch (type) {
    case ScoreType::Precision:
      return "precision";
    case ScoreType::Recall:
      return "recall";
    case ScoreType::F1:
      return "f1";
  }
  return "f1";
}

ScoreType parse_score_type(const std::string& name) {
  if (name == "precision" || name == "p") return ScoreType::Precision;
  if (name == "recall" || name == "r") return ScoreType::Recall;
  if (name == "f1" || name == "f") return ScoreType::F1;
  throw ConfigError("unknown label score type '" + name + "' (expected precision, recall or f1)");
}

double pick(const RougeScore& score, ScoreType type) {
  switch (type) {
    case ScoreType::Precision:
      return score.precision;
    case ScoreType::Recall:
      return score.recall;
    case ScoreType::F1:
      return score.f1;
  }
  return score.f1;
}

void LabelConfig::validate() const {
  if (ngram != 1 && ngram != 2) throw ConfigError("labels.ngram must be 1 or 2");
}

std::vector<LabelConfig> all_label_configs() {
  std::vector<LabelConfig> out;
  for (bool seq : {false, true})
    for (std::size_t n : {1, 2})
      for (ScoreType t : {ScoreType::F1, ScoreType::Precision, ScoreType::Recall})
        out.push_back(LabelConfig{seq, n, t, false});
  return out;
}

Tensor proxy_labels(std::span<const text::Snippet> snippets, std::span<const TokenId> summary,
                    const LabelConfig& cfg) {
  cfg.validate();
  if (snippets.empty()) throw InputError("proxy_labels: example has no snippets");
  const TokenSeq reference = strip_special(summary);
  const std::size_t n = snippets.size();
  std::vector<double> labels(n, 0.0);

  if (!cfg.sequential) {
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = pick(rouge_n(snippets[i].tokens, reference, cfg.ngram), cfg.score_type);
    }
    return Tensor::vector(std::move(labels));
  }

  // Greedy selection: add the snippet with the largest improvement of the
  // selection's score (selection concatenated in document order) until none helps.
  std::vector<char> chosen(n, 0);
  double current = 0.0;
  while (true) {
    double best_score = current;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      chosen[i] = 1;
      const double s = pick(rouge_n(concat_selected(snippets, chosen), reference, cfg.ngram), cfg.score_type);
      chosen[i] = 0;
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best == n) break;
    chosen[best] = 1;
    labels[best] = cfg.binary_sequential ? 1.0 : std::max(0.0, best_score - current);
    current = best_score;
  }
  return Tensor::vector(std::move(labels));
}

std::vector<TokenSeq> split_segments(std::span<const TokenId> target, std::size_t segment_length,
                                     std::size_t num_segments) {
  if (segment_length == 0) throw ConfigError("segment length must be >= 1");
  std::vector<TokenSeq> out(num_segments);
  for (std::size_t j = 0; j < num_segments; ++j) {
    const std::size_t begin = j * segment_length;
    if (begin >= target.size()) break;
    const std::size_t end = std::min(target.size(), begin + segment_length);
    out[j].assign(target.begin() + begin, target.begin() + end);
  }
  return out;
}

Tensor segment_labels(std::span<const text::Snippet> snippets, std::span<const TokenId> summary,
                      std::size_t segment_length, std::size_t num_segments, const LabelConfig& cfg) {
  cfg.validate();
  if (snippets.empty()) throw InputError("segment_labels: example has no snippets");
  if (num_segments == 0) throw ConfigError("segment_labels: need at least one segment");
  const auto segments = split_segments(summary, segment_length, num_segments);
  Tensor out(Shape{snippets.size(), num_segments});
  for (std::size_t j = 0; j < num_segments; ++j) {
    const TokenSeq reference = strip_special(segments[j]);
    if (reference.empty()) continue;
    for (std::size_t i = 0; i < snippets.size(); ++i) {
      out.at(i, j) = pick(rouge_n(snippets[i].tokens, reference, cfg.ngram), cfg.score_type);
    }
  }
  return out;
}

}  // namespace seal::labels
